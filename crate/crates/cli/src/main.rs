//! `soblab`: Sobolev constants, model spaces and related checks from the
//! command line.

mod commands;
mod error;
mod grid;
mod output;
mod params;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use commands::Command;
use error::CliError;
use output::{Format, Sink, Status};

/// Numerical toolkit for sharp Sobolev inequalities on weighted intervals.
#[derive(Debug, Parser)]
#[command(name = "soblab", version)]
struct Cli {
    /// Emit a JSON report (the default, except for `sweep`).
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Emit the tabular part of the report as CSV.
    #[arg(long, global = true)]
    csv: bool,
    /// Write the report here instead of standard output.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

const THREADS_VAR: &str = "SOBLAB_THREADS";

/// Sizes the global worker pool from `SOBLAB_THREADS` when it is set.
fn configure_pool() -> Result<usize, CliError> {
    if let Ok(text) = std::env::var(THREADS_VAR) {
        let n: usize = text
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::usage(format!("{THREADS_VAR} must be a positive integer, got {text:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(format!("cannot size the worker pool: {e}")))?;
    }
    Ok(rayon::current_num_threads())
}

fn run(cli: &Cli) -> Result<Status, CliError> {
    let started = Instant::now();
    let threads = configure_pool()?;
    let format = if cli.csv || (!cli.json && matches!(cli.command, Command::Sweep(_))) {
        Format::Csv
    } else {
        Format::Json
    };
    let sink = Sink { format, path: cli.output.clone(), started, threads };
    let config = output::to_value(&cli.command)?;
    let outcome = cli.command.run()?;
    sink.emit(cli.command.name(), &config, &outcome)?;
    Ok(outcome.status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("soblab {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
