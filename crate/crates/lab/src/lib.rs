//! Runs `fhs-core` experiments from config files and writes their tables.

pub mod cache;
pub mod config;
pub mod error;
pub mod experiments;
pub mod table;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

pub use cache::{BubbleCache, Cached, CACHE_ENV};
pub use config::{ConfigError, Experiment, ExperimentConfig, Format};
pub use error::{LabError, Result};
pub use experiments::Outcome;
pub use table::{Cell, Table};

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub fhs_lab: &'static str,
    pub fhs_core: &'static str,
}

/// Everything about a run except the output rows.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub experiment: Experiment,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub threads: usize,
    pub versions: Versions,
    pub wall_time_s: f64,
    pub cache_hit: bool,
    pub cache_entry: PathBuf,
    pub bubble_iterations: usize,
    pub warnings: Vec<String>,
    pub outputs: Vec<String>,
    pub summary: serde_json::Map<String, serde_json::Value>,
}

/// Runtime options that sit outside the config file.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub seed: Option<u64>,
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
    pub cache: BubbleCache,
}

/// Computes the experiment without touching the output directory.
pub fn compute(
    experiment: Experiment,
    cfg: &ExperimentConfig,
    cache: &BubbleCache,
    seed: u64,
) -> Result<(Outcome, Cached)> {
    let mut warnings = Vec::new();
    let cached = cache.load_or_solve(&cfg.params(), &cfg.grid(), cfg.tol, &mut warnings)?;
    let v = &cached.bubble;
    let mut out = match experiment {
        Experiment::SolveBubble => experiments::solve_bubble_outcome(v, cfg)?,
        Experiment::Spectrum => experiments::spectrum_outcome(v, &cfg.spectrum, seed)?,
        Experiment::InteractionSweep => {
            let mut o = experiments::interaction_outcome(v, &cfg.interaction)?;
            o.tables.push(experiments::cross_check_table(v, &cfg.interaction.qs)?);
            o
        }
        Experiment::CutoffSweep => experiments::cutoff_outcome(v, &cfg.cutoff)?,
        Experiment::KpvSweep => experiments::kpv_outcome(v, &cfg.kpv, seed)?,
        Experiment::StabilitySweep => experiments::stability_outcome(v, &cfg.stability)?,
        Experiment::Project => experiments::project_outcome(v, &cfg.project)?,
    };
    warnings.append(&mut out.warnings);
    out.warnings = warnings;
    Ok((out, cached))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(LabError::io(path))
}

/// Runs one experiment and writes its tables, text files and `manifest.json` to `opts.out`.
pub fn run(experiment: Experiment, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Manifest> {
    if let Some(named) = cfg.experiment {
        if named != experiment {
            return Err(LabError::ExperimentMismatch {
                config: named.to_string(),
                command: experiment.to_string(),
            });
        }
    }
    let start = Instant::now();
    let seed = opts.seed.unwrap_or(cfg.seed);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| LabError::Io {
        path: opts.out.clone(),
        source: std::io::Error::other(e),
    })?;
    let (outcome, cached) = pool.install(|| compute(experiment, cfg, &opts.cache, seed))?;

    fs::create_dir_all(&opts.out).map_err(LabError::io(&opts.out))?;
    let mut outputs = Vec::new();
    for t in &outcome.tables {
        let (name, bytes) = match cfg.format {
            Format::Csv => (format!("{}.csv", t.name), t.to_csv()),
            Format::Text => (format!("{}.txt", t.name), t.to_text().into_bytes()),
        };
        write(&opts.out.join(&name), &bytes)?;
        outputs.push(name);
    }
    for (name, text) in &outcome.texts {
        write(&opts.out.join(name), text.as_bytes())?;
        outputs.push(name.clone());
    }
    let mut config = cfg.clone();
    config.seed = seed;
    let manifest = Manifest {
        experiment,
        config,
        seed,
        threads: pool.current_num_threads(),
        versions: Versions {
            fhs_lab: env!("CARGO_PKG_VERSION"),
            fhs_core: fhs_core::VERSION,
        },
        wall_time_s: start.elapsed().as_secs_f64(),
        cache_hit: cached.hit,
        cache_entry: cached.path.clone(),
        bubble_iterations: cached.bubble.iterations(),
        warnings: outcome.warnings,
        outputs,
        summary: outcome.summary,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write(&opts.out.join("manifest.json"), format!("{json}\n").as_bytes())?;
    Ok(manifest)
}
