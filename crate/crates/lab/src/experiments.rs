//! One runner per experiment. Each returns tables whose rows carry the full `(N, s, t)`
//! tuple. Sweep points are evaluated in parallel and collected in input order.

use fhs_core::{
    cutoff_weighted_norm, default_bump, dilate, hs_cross_inner, hs_inner, kpv_family, kpv_ratio, linearized_eigs,
    localized_interaction_check, profile_to_text, project_multibubble, random_bump, scaling_regression,
    spectral_gap_check, stability_point, summarize_sweep, two_bubble_integral, Bubble, CutoffSpec, KpvExponents,
    Params, ProjectOptions, RadialFn, ScalingModel,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{
    CutoffConfig, ExperimentConfig, InteractionConfig, KpvConfig, ProjectConfig, SpectrumConfig, StabilityConfig,
};
use crate::error::Result;
use crate::table::{Cell, Table};

/// Tables, extra text files and a JSON summary for the manifest.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub texts: Vec<(String, String)>,
    pub warnings: Vec<String>,
    pub summary: serde_json::Map<String, Value>,
}

fn head(p: &Params) -> Vec<Cell> {
    vec![p.dim().into(), p.s().into(), p.t().into()]
}

fn row(p: &Params, rest: impl IntoIterator<Item = Cell>) -> Vec<Cell> {
    let mut r = head(p);
    r.extend(rest);
    r
}

pub fn solve_bubble_outcome(v: &Bubble, cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = v.params();
    let g = v.grid();
    let norm = hs_inner(v.profile(), v.profile(), p)?.sqrt();
    let slope = v.tail_slope(1e2, 1e5);
    let mut t = Table::new(
        "bubble",
        &[
            "N",
            "s",
            "t",
            "r_min",
            "r_max",
            "n",
            "tol",
            "mu",
            "rayleigh_mu",
            "residual",
            "hs_norm",
            "relative_residual",
            "tail_slope",
            "tail_exponent",
        ],
    );
    t.push(row(
        p,
        [
            g.r_min().into(),
            g.r_max().into(),
            g.len().into(),
            cfg.tol.into(),
            v.mu().into(),
            v.rayleigh_mu().into(),
            v.residual().into(),
            norm.into(),
            (v.residual() / norm).into(),
            slope.into(),
            (-(p.n() - 2.0 * p.s())).into(),
        ],
    ));
    let mut out = Outcome {
        tables: vec![t],
        texts: vec![("profile.txt".into(), profile_to_text(v))],
        ..Default::default()
    };
    out.summary.insert("mu".into(), json!(v.mu()));
    out.summary.insert("residual".into(), json!(v.residual()));
    out.summary
        .insert("relative_residual".into(), json!(v.residual() / norm));
    out.summary.insert("tol".into(), json!(cfg.tol));
    out.summary.insert("tail_slope".into(), json!(slope));
    Ok(out)
}

pub fn spectrum_outcome(v: &Bubble, cfg: &SpectrumConfig, seed: u64) -> Result<Outcome> {
    let p = v.params();
    let report = linearized_eigs(v, cfg.k, cfg.lambda)?;
    let mut eig = Table::new(
        "spectrum",
        &["N", "s", "t", "lambda", "index", "mu", "gap_margin", "trimmed_nodes"],
    );
    for (i, mu) in report.eigenvalues.iter().enumerate() {
        eig.push(row(
            p,
            [
                cfg.lambda.into(),
                (i + 1).into(),
                (*mu).into(),
                report.gap_margin.into(),
                report.trimmed_nodes.into(),
            ],
        ));
    }
    let mut out = Outcome {
        texts: vec![("spectrum.txt".into(), report.to_text())],
        ..Default::default()
    };
    out.summary.insert("eigenvalues".into(), json!(report.eigenvalues));
    out.summary.insert("gap_margin".into(), json!(report.gap_margin));
    out.tables.push(eig);

    if report.eigenvalues.len() < 3 {
        if cfg.gap_samples > 0 {
            out.warnings
                .push(format!("gap check needs k ≥ 3, got k = {}; skipped", cfg.k));
        }
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tests: Vec<(String, RadialFn)> = (0..cfg.gap_samples)
        .map(|i| (format!("random_{i}"), random_bump(v.grid(), &mut rng)))
        .collect();
    tests.push(("eigenfunction_3".into(), report.eigenfunctions[2].clone()));
    let checks: Vec<_> = tests
        .par_iter()
        .map(|(name, f)| spectral_gap_check(v, f, &report).map(|c| (name.clone(), c)))
        .collect::<std::result::Result<_, _>>()?;
    let mut gap = Table::new("gap", &["N", "s", "t", "lambda", "sample", "lhs", "rhs", "ratio"]);
    let mut worst = 0.0f64;
    for (name, c) in checks {
        worst = worst.max(c.ratio);
        gap.push(row(
            p,
            [
                cfg.lambda.into(),
                Cell::Text(name),
                c.lhs.into(),
                c.rhs.into(),
                c.ratio.into(),
            ],
        ));
    }
    out.summary.insert("max_gap_ratio".into(), json!(worst));
    out.tables.push(gap);
    Ok(out)
}

pub fn interaction_outcome(v: &Bubble, cfg: &InteractionConfig) -> Result<Outcome> {
    let p = v.params();
    let points: Vec<(f64, f64, f64)> = cfg
        .pairs
        .iter()
        .flat_map(|&(a, b)| cfg.qs.iter().map(move |&q| (a, b, q)))
        .collect();
    let values: Vec<f64> = points
        .par_iter()
        .map(|&(a, b, q)| two_bubble_integral(v, 1.0, q, a, b))
        .collect::<std::result::Result<_, _>>()?;
    let mut t = Table::new(
        "interaction",
        &[
            "N",
            "s",
            "t",
            "alpha",
            "beta",
            "Q",
            "integral",
            "predicted_exponent",
            "fitted_exponent",
            "residual",
        ],
    );
    let mut out = Outcome::default();
    let mut fits = Vec::new();
    for (k, &(a, b)) in cfg.pairs.iter().enumerate() {
        let n = cfg.qs.len();
        let pts: Vec<(f64, f64)> = cfg
            .qs
            .iter()
            .copied()
            .zip(values[k * n..(k + 1) * n].iter().copied())
            .collect();
        let predicted = (p.n() - 2.0 * p.s()) * a.min(b) / 2.0;
        let (fitted, residual) = match scaling_regression(&pts, ScalingModel::Power) {
            Ok(power) => {
                let residual = if a == b {
                    scaling_regression(&pts, ScalingModel::PowerLog { exponent: predicted })?.residual
                } else {
                    power.residual
                };
                (power.exponent, residual)
            }
            Err(e) => {
                out.warnings.push(format!("no fit for (α, β) = ({a}, {b}): {e}"));
                (f64::NAN, f64::NAN)
            }
        };
        for &(q, x) in &pts {
            t.push(row(
                p,
                [
                    a.into(),
                    b.into(),
                    q.into(),
                    x.into(),
                    predicted.into(),
                    fitted.into(),
                    residual.into(),
                ],
            ));
        }
        fits.push(json!({"alpha": a, "beta": b, "predicted_exponent": predicted, "fitted_exponent": fitted, "residual": residual}));
    }
    out.summary.insert("fits".into(), Value::Array(fits));
    out.tables.push(t);
    Ok(out)
}

/// `⟨V, V_Q⟩_{Ḣ^s}` against `∫ V^p V_Q |x|^{-t}` and the localized-ball ratio over `qs`.
pub fn cross_check_table(v: &Bubble, qs: &[f64]) -> Result<Table> {
    let p = v.params();
    let rows: Vec<(f64, f64, f64, f64)> = qs
        .par_iter()
        .map(|&q| -> fhs_core::Result<_> {
            let hs = hs_cross_inner(v, 1.0, q)?;
            let weak = two_bubble_integral(v, 1.0, q, p.p(), 1.0)?;
            Ok((q, hs, weak, localized_interaction_check(v, 1.0, q)?))
        })
        .collect::<std::result::Result<_, _>>()?;
    let mut t = Table::new(
        "interaction_forms",
        &[
            "N",
            "s",
            "t",
            "Q",
            "hs_inner",
            "weak_form",
            "relative_gap",
            "localized_ratio",
        ],
    );
    for (q, hs, weak, loc) in rows {
        t.push(row(
            p,
            [
                q.into(),
                hs.into(),
                weak.into(),
                ((hs - weak).abs() / weak.abs()).into(),
                loc.into(),
            ],
        ));
    }
    Ok(t)
}

pub fn cutoff_outcome(v: &Bubble, cfg: &CutoffConfig) -> Result<Outcome> {
    let p = v.params();
    let grid = v.grid();
    let norms: Vec<f64> = cfg
        .ratios
        .par_iter()
        .map(|&ratio| cutoff_weighted_norm(&CutoffSpec::new(cfg.inner, cfg.inner * ratio)?, grid, p))
        .collect::<std::result::Result<_, _>>()?;
    let mut out = Outcome::default();
    let pts: Vec<(f64, f64)> = cfg.ratios.iter().map(|r| r.ln()).zip(norms.iter().copied()).collect();
    let slope = match scaling_regression(&pts, ScalingModel::Power) {
        Ok(f) => f.exponent,
        Err(e) => {
            out.warnings.push(format!("no slope fit: {e}"));
            f64::NAN
        }
    };
    let mut t = Table::new("cutoff", &["N", "s", "t", "r", "R", "ratio", "norm", "fitted_slope"]);
    for (&ratio, &norm) in cfg.ratios.iter().zip(&norms) {
        t.push(row(
            p,
            [
                cfg.inner.into(),
                (cfg.inner * ratio).into(),
                ratio.into(),
                norm.into(),
                slope.into(),
            ],
        ));
    }
    out.summary.insert("fitted_slope".into(), json!(slope));
    out.summary.insert("target_slope".into(), json!(-1.0 / p.crit()));
    out.tables.push(t);
    Ok(out)
}

pub fn kpv_outcome(v: &Bubble, cfg: &KpvConfig, seed: u64) -> Result<Outcome> {
    let p = v.params();
    let e = KpvExponents::standard(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let family = kpv_family(v.grid(), Some(v), 2 * cfg.pairs, &mut rng)?;
    let jobs: Vec<(usize, f64)> = (0..cfg.pairs)
        .flat_map(|i| cfg.lambdas.iter().map(move |&l| (i, l)))
        .collect();
    let ratios: Vec<f64> = jobs
        .par_iter()
        .map(|&(i, l)| {
            let f = dilate(&family[2 * i], l, p)?;
            let g = dilate(&family[2 * i + 1], l, p)?;
            kpv_ratio(&f, &g, &e, p)
        })
        .collect::<std::result::Result<_, _>>()?;
    let mut t = Table::new(
        "kpv",
        &[
            "N", "s", "t", "pair", "lambda", "alpha1", "alpha2", "p1", "p2", "a1", "a2", "ratio",
        ],
    );
    for (&(i, l), &r) in jobs.iter().zip(&ratios) {
        t.push(row(
            p,
            [
                i.into(),
                l.into(),
                e.alpha1.into(),
                e.alpha2.into(),
                e.p1.into(),
                e.p2.into(),
                e.a1.into(),
                e.a2.into(),
                r.into(),
            ],
        ));
    }
    let mut out = Outcome::default();
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    out.summary.insert("min_ratio".into(), json!(lo));
    out.summary.insert("max_ratio".into(), json!(hi));
    out.tables.push(t);
    Ok(out)
}

pub fn stability_outcome(v: &Bubble, cfg: &StabilityConfig) -> Result<Outcome> {
    let p = v.params();
    let phi = default_bump(v.grid());
    let rows: Vec<_> = cfg
        .kappas
        .par_iter()
        .map(|&k| stability_point(v, cfg.nu, &phi, k))
        .collect::<std::result::Result<_, _>>()?;
    let summary = summarize_sweep(&rows)?;
    let mut t = Table::new(
        "stability",
        &[
            "N",
            "s",
            "t",
            "nu",
            "kappa",
            "gamma",
            "distance",
            "ratio",
            "slope_gamma",
            "slope_distance",
            "max_ortho_residual",
            "min_Q",
            "energy",
            "energy_window_ok",
            "max_cross",
        ],
    );
    let mut out = Outcome::default();
    for r in &rows {
        if !r.energy_window_ok {
            out.warnings.push(format!(
                "κ = {:?}: energy {:?} outside the ν-bubble window",
                r.kappa, r.energy
            ));
        }
        t.push(row(
            p,
            [
                cfg.nu.into(),
                r.kappa.into(),
                r.gamma.into(),
                r.distance.into(),
                r.ratio.into(),
                summary.slope_gamma.into(),
                summary.slope_distance.into(),
                r.max_ortho_residual.into(),
                r.min_q.into(),
                r.energy.into(),
                r.energy_window_ok.into(),
                r.max_cross.into(),
            ],
        ));
    }
    out.summary.insert("slope_gamma".into(), json!(summary.slope_gamma));
    out.summary
        .insert("slope_distance".into(), json!(summary.slope_distance));
    out.summary.insert("ratio_spread".into(), json!(summary.ratio_spread));
    out.tables.push(t);
    Ok(out)
}

pub fn project_outcome(v: &Bubble, cfg: &ProjectConfig) -> Result<Outcome> {
    let p = v.params();
    let nu = cfg.scales.len();
    let mut u = default_bump(v.grid()).scale(cfg.perturbation);
    for (&l, &c) in cfg.scales.iter().zip(&cfg.coeffs) {
        u = u.axpy(c, &v.dilate(l)?)?;
    }
    let rep = project_multibubble(&u, v, nu, None, ProjectOptions::default())?;
    let mut truth: Vec<(f64, f64)> = cfg.scales.iter().copied().zip(cfg.coeffs.iter().copied()).collect();
    truth.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut fitted: Vec<(f64, f64)> = rep
        .family
        .scales
        .iter()
        .copied()
        .zip(rep.family.coeffs.iter().copied())
        .collect();
    fitted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut t = Table::new(
        "project",
        &[
            "N",
            "s",
            "t",
            "nu",
            "index",
            "true_scale",
            "true_coeff",
            "scale",
            "coeff",
            "scale_error",
            "coeff_error",
            "distance",
            "gamma",
            "max_ortho_residual",
        ],
    );
    let mut worst = 0.0f64;
    for (i, (&(ls, lc), &(fs, fc))) in truth.iter().zip(&fitted).enumerate() {
        let (es, ec) = ((fs / ls - 1.0).abs(), (fc - lc).abs());
        worst = worst.max(es).max(ec);
        t.push(row(
            p,
            [
                nu.into(),
                i.into(),
                ls.into(),
                lc.into(),
                fs.into(),
                fc.into(),
                es.into(),
                ec.into(),
                rep.distance.into(),
                rep.gamma.into(),
                rep.max_ortho_residual().into(),
            ],
        ));
    }
    let mut out = Outcome {
        warnings: rep.warnings.clone(),
        ..Default::default()
    };
    out.summary.insert("distance".into(), json!(rep.distance));
    out.summary.insert("max_parameter_error".into(), json!(worst));
    out.tables.push(t);
    Ok(out)
}
