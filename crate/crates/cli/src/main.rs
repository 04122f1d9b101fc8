//! Batch front-end for the load-segmentation pipeline: synthetic data
//! generation, stratified splitting, preprocessing, threshold optimization,
//! evaluation, and production annotation / load estimation.

mod commands;
mod config;
mod util;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use util::{atomic_write, CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "loadseg",
    version,
    about = "Anomaly and switch-event filtering for power-grid load measurements"
)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, default_value = "loadseg.toml")]
    config: PathBuf,
    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Override the configured output directory.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write synthetic station CSVs plus a manifest.
    Generate,
    /// Stratified train/validation/test split with a per-category tally.
    Split,
    /// Emit per-station difference CSVs with fit sidecars.
    Preprocess,
    /// Grid-scan detectors on train, select on validation, write the model.
    Optimize,
    /// Apply the model file to the test split and write the report.
    Evaluate,
    /// Apply one method to all stations; per-point annotations + estimates.
    Annotate {
        /// Method name from the model file (default: sequential ensemble).
        #[arg(long)]
        method: Option<String>,
    },
    /// Min/max load estimates under every filter, as one CSV.
    EstimateLoads {
        /// Method name from the model file (default: sequential ensemble).
        #[arg(long)]
        method: Option<String>,
    },
}

fn run(cli: &Cli) -> CliResult<()> {
    let mut config = RunConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(output_dir) = &cli.output_dir {
        config.paths.output_dir = output_dir.clone();
    }
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
    }

    // Every command leaves a provenance snapshot of what it actually ran with.
    atomic_write(
        &config.paths.output_dir.join("resolved-config.toml"),
        config.snapshot()?.as_bytes(),
    )?;

    match &cli.command {
        Command::Generate => commands::generate::run(&config),
        Command::Split => commands::split::run(&config),
        Command::Preprocess => commands::preprocess::run(&config),
        Command::Optimize => commands::optimize::run(&config),
        Command::Evaluate => commands::evaluate::run(&config),
        Command::Annotate { method } => commands::annotate::run(&config, method.as_deref()),
        Command::EstimateLoads { method } => commands::estimate::run(&config, method.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
