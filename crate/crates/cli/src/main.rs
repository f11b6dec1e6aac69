use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use t3lab_cli::{run, Command, ExperimentConfig, RunError};

#[derive(Parser)]
#[command(name = "t3lab", version, about = "Experiments on the three-well T3 problem")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args)]
struct Common {
    /// TOML config; missing keys take the default parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for artifacts and the manifest.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the compute kernels (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Sub {
    /// Run the equilibrium solver.
    Simulate(Common),
    /// Laminate energy scaling sweep.
    Scaling(Common),
    /// Fourier diagnostics on a solver checkpoint.
    Diagnose {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Well-system and T3 report.
    Algebra(Common),
}

fn execute(cli: Cli) -> Result<(), RunError> {
    let (common, cmd) = match cli.command {
        Sub::Simulate(c) => (c, Command::Simulate),
        Sub::Scaling(c) => (c, Command::Scaling),
        Sub::Diagnose { common, checkpoint } => (common, Command::Diagnose { checkpoint }),
        Sub::Algebra(c) => (c, Command::Algebra),
    };
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let threads = common.threads.unwrap_or(0);
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        eprintln!("warning: thread pool: {e}");
    }
    let manifest = run(&cmd, &cfg, &common.out)?;
    eprintln!(
        "{}: {} artifacts in {} (config {})",
        manifest.run.subcommand,
        manifest.artifacts.len(),
        common.out.display(),
        &manifest.run.config_sha256[..16]
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli).context("t3lab failed") {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<RunError>() {
                Some(RunError::NotConverged { .. }) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
