//! `esboost` experiment runner.
//!
//! Each subcommand reads one `key=value` config file and writes CSV tables
//! into `--out` (or the config's `output` key). Without either, the primary
//! table goes to stdout.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use esboost::config::{parse_config, ExperimentKind};
use esboost::experiment::{run_experiment, ExperimentError};

#[derive(Debug, Parser)]
#[command(
    name = "esboost",
    version,
    about = "Greedy boosting with early stopping"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct Target {
    /// Configuration file (key=value lines).
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a synthetic dataset.
    Gen(Target),
    /// Fit one model and write its trace.
    Train(Target),
    /// Stopped runs over sample sizes and seeds.
    Sweep(Target),
    /// Convergence bounds next to the observed gap.
    Bounds(Target),
    /// Monte Carlo Rademacher complexity of stumps.
    Rademacher(Target),
    /// Constant-step exponential boosting on a finite instance.
    Margin(Target),
}

impl Command {
    fn split(self) -> (ExperimentKind, Target) {
        match self {
            Command::Gen(t) => (ExperimentKind::Gen, t),
            Command::Train(t) => (ExperimentKind::Train, t),
            Command::Sweep(t) => (ExperimentKind::Sweep, t),
            Command::Bounds(t) => (ExperimentKind::Bounds, t),
            Command::Rademacher(t) => (ExperimentKind::Rademacher, t),
            Command::Margin(t) => (ExperimentKind::Margin, t),
        }
    }
}

fn run(kind: ExperimentKind, target: Target) -> Result<(), ExperimentError> {
    let text = fs::read_to_string(&target.config).map_err(|source| ExperimentError::Io {
        context: format!("reading {}", target.config.display()),
        source,
    })?;
    let cfg = parse_config(&text)?;
    let base = target.config.parent().unwrap_or(Path::new("."));
    let outputs = run_experiment(&cfg, kind, base)?;
    match target
        .out
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
    {
        Some(dir) => outputs.write_to(&dir),
        None => io::stdout()
            .lock()
            .write_all(outputs.primary().contents.as_bytes())
            .map_err(|source| ExperimentError::Io {
                context: "writing stdout".into(),
                source,
            }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, target) = cli.command.split();
    match run(kind, target) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("esboost {kind}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
