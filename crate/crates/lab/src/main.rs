use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fhs_lab::{run, BubbleCache, Experiment, ExperimentConfig, LabError, RunOptions};

/// Run fractional Hardy-Sobolev bubble experiments and write CSV tables plus a manifest.
#[derive(Parser, Debug)]
#[command(name = "fhs-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML config; without one, (N, s, t) = (2, 0.75, 0.5) with default settings
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Overrides the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for sweep points
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Solve for the bubble and write its profile
    SolveBubble,
    /// Linearized eigenvalues and the spectral gap check
    Spectrum,
    /// Two-bubble integrals over Q with scaling fits
    InteractionSweep,
    /// Weighted norms of fractional powers of log cutoffs
    CutoffSweep,
    /// Weighted commutator ratios over a random family
    KpvSweep,
    /// Sharpness sweep of deficit and distance in κ
    StabilitySweep,
    /// Project a multi-bubble sum onto the manifold
    Project,
}

impl From<Command> for Experiment {
    fn from(c: Command) -> Self {
        match c {
            Command::SolveBubble => Experiment::SolveBubble,
            Command::Spectrum => Experiment::Spectrum,
            Command::InteractionSweep => Experiment::InteractionSweep,
            Command::CutoffSweep => Experiment::CutoffSweep,
            Command::KpvSweep => Experiment::KpvSweep,
            Command::StabilitySweep => Experiment::StabilitySweep,
            Command::Project => Experiment::Project,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| format!("{}: {e}", path.display()))
            .and_then(|text| ExperimentConfig::parse(&text).map_err(|e| format!("{}: {e}", path.display()))),
        None => ExperimentConfig::with_params(2, 0.75, 0.5).map_err(|e| e.to_string()),
    };
    let cfg = match cfg {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let opts = RunOptions {
        cache: BubbleCache::from_env(&cli.out.join("cache")),
        out: cli.out,
        seed: cli.seed,
        threads: cli.threads,
    };
    match run(cli.command.into(), &cfg, &opts) {
        Ok(m) => {
            for w in &m.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "{}: wrote {} to {} in {:.2} s (cache {})",
                m.experiment,
                m.outputs.join(", "),
                opts.out.display(),
                m.wall_time_s,
                if m.cache_hit { "hit" } else { "miss" }
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let LabError::Core(fhs_core::Error::SolverFailure { history, .. }) = &e {
                let tail = &history[history.len().saturating_sub(5)..];
                eprintln!("last iterate changes: {tail:?}");
            }
            ExitCode::FAILURE
        }
    }
}
