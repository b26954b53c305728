//! `csdlab`: runs channel simulation divergence experiments from JSON
//! configs and writes JSON or CSV records.

mod config;
mod error;
mod experiments;
mod output;
mod records;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{Experiment, ExperimentConfig, OutputFormat};
use crate::error::{CliError, CliResult, EXIT_BOUND, EXIT_CODE_HELP, EXIT_OK};
use crate::experiments::TiltVerb;

#[derive(Parser)]
#[command(name = "csdlab", version, about, after_help = EXIT_CODE_HELP)]
#[command(long_about = "Runs channel simulation divergence experiments.\n\n\
The environment variable CSDLAB_THREADS caps the number of worker threads.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; overrides output_path. Without either, records go to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Width-function divergences of every posterior slice of a channel.
    Divergence(Common),
    /// Exact or Monte-Carlo block redundancy over n_list.
    RedundancySweep(Common),
    /// Conditional index entropy of the Poisson functional representation.
    Simulate(Common),
    /// Cumulants, dominance and moment checks, typicality sweeps and ball bounds.
    TiltLab {
        #[arg(value_enum)]
        verb: TiltVerb,
        #[command(flatten)]
        common: Common,
    },
    /// The acceptance suite plus per-channel checks.
    VerifyAll(Common),
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("CSDLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("CSDLAB_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn execute(cli: Cli) -> CliResult<u8> {
    configure_threads()?;
    let (experiment, verb, common) = match cli.command {
        Command::Divergence(c) => (Experiment::Divergence, None, c),
        Command::RedundancySweep(c) => (Experiment::RedundancySweep, None, c),
        Command::Simulate(c) => (Experiment::Simulate, None, c),
        Command::TiltLab { verb, common } => (Experiment::TiltLab, Some(verb), common),
        Command::VerifyAll(c) => (Experiment::VerifyAll, None, c),
    };
    let mut config = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None if experiment == Experiment::VerifyAll => ExperimentConfig {
            seed: csdlab_core::acceptance::DEFAULT_SEED,
            ..Default::default()
        },
        None => return Err(CliError::Config("--config is required".into())),
    };
    if let Some(s) = common.seed {
        config.seed = s;
    }
    if let Some(o) = common.out {
        config.output_path = Some(o);
    }

    let report = experiments::run(experiment, verb, &config)?;
    let bytes = match config.output_format {
        OutputFormat::Json => &report.json,
        OutputFormat::Csv => &report.csv,
    };
    match &config.output_path {
        Some(p) => output::write_atomic(p, bytes)?,
        None => std::io::stdout().write_all(bytes).map_err(|e| CliError::Io(e.to_string()))?,
    }
    for v in &report.violations {
        eprintln!("violation: {v}");
    }
    Ok(if report.violations.is_empty() { EXIT_OK } else { EXIT_BOUND })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            e.into()
        }
    }
}
