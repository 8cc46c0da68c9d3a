use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fhs-lab"))
        .args(args)
        .env("FHS_LAB_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn malformed_config_fails_with_line_and_bound() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[params]\nN = 2\ns = 0.75\nt = 1.6\n").unwrap();
    let out = dir.path().join("out");
    let o = lab(
        &[
            "spectrum",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        &dir.path().join("c"),
    );
    assert!(!o.status.success());
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 4") && err.contains("t ∈ (0, 2s)"), "{err}");
    assert!(!out.exists());
}

#[test]
fn solve_bubble_writes_profile_and_reuses_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let cfg = dir.path().join("c.toml");
    fs::write(
        &cfg,
        "[params]\nN = 2\ns = 0.75\nt = 0.5\n[grid]\nr_min = 1e-24\nr_max = 1e24\nn = 3073\n[solver]\ntol = 1e-9\n",
    )
    .unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = lab(
            &[
                "solve-bubble",
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ],
            &cache,
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ma, mb) = (manifest(&a), manifest(&b));
    assert_eq!(ma["cache_hit"], false);
    assert_eq!(mb["cache_hit"], true);
    assert!(ma["summary"]["relative_residual"].as_f64().unwrap() <= 1e-6);
    assert_eq!(ma["config"]["params"]["N"], 2);
    assert!(ma["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert!(ma["versions"]["fhs_core"].is_string());
    assert_eq!(
        fs::read(a.join("profile.txt")).unwrap(),
        fs::read(b.join("profile.txt")).unwrap()
    );
    assert_eq!(
        fs::read(a.join("bubble.csv")).unwrap(),
        fs::read(b.join("bubble.csv")).unwrap()
    );

    fs::write(
        &cfg,
        "[params]\nN = 2\ns = 0.75\nt = 0.5\n[grid]\nr_min = 1e-24\nr_max = 1e24\nn = 3074\n[solver]\ntol = 1e-9\n",
    )
    .unwrap();
    let c = dir.path().join("c");
    let o = lab(
        &[
            "solve-bubble",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            c.to_str().unwrap(),
        ],
        &cache,
    );
    assert!(o.status.success());
    assert_eq!(manifest(&c)["cache_hit"], false);
}

#[test]
fn spectrum_text_report_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(
        &cfg,
        "seed = 3\n[params]\nN = 2\ns = 0.75\nt = 0.5\n[spectrum]\nk = 5\ngap_samples = 4\n[output]\nformat = \"text\"\n",
    )
    .unwrap();
    let out = dir.path().join("o");
    let o = lab(
        &[
            "spectrum",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "9",
            "--threads",
            "2",
        ],
        &dir.path().join("cache"),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = fs::read_to_string(out.join("spectrum.txt")).unwrap();
    let mu = |k: usize| -> f64 {
        let key = format!("mu_{k} = ");
        report
            .lines()
            .find_map(|l| l.strip_prefix(key.as_str()))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!((mu(1) - 1.0).abs() < 1e-3 && (mu(2) - 5.0).abs() < 1e-2, "{report}");
    assert!(out.join("gap.txt").exists() && !out.join("gap.csv").exists());
    let m = manifest(&out);
    assert_eq!(m["seed"], 9);
    assert_eq!(m["threads"], 2);
}

#[test]
fn experiment_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "experiment = \"project\"\n[params]\nN = 2\ns = 0.75\nt = 0.5\n").unwrap();
    let o = lab(
        &[
            "cutoff-sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.path().join("o").to_str().unwrap(),
        ],
        &dir.path().join("c"),
    );
    assert!(!o.status.success());
    assert!(String::from_utf8(o.stderr).unwrap().contains("experiment mismatch"));
}

#[test]
fn cutoff_rows_carry_the_parameter_tuple() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(
        &cfg,
        "[params]\nN = 3\ns = 0.9\nt = 0.4\n[cutoff]\ninner = 2.0\nratios = [1e2, 1e3, 1e4, 1e5]\n",
    )
    .unwrap();
    let out = dir.path().join("o");
    let o = lab(
        &[
            "cutoff-sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        &dir.path().join("c"),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("cutoff.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,s,t,r,R,ratio,norm,fitted_slope"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.starts_with("3,0.9,0.4,2.0,")));
    assert!(!text.contains('\r'));
}
