//! `nongauss`: experiments on the non-Gaussianness of normalized sums and of
//! Gaussian channel outputs.

mod commands;
mod config;
mod error;
mod montecarlo;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{Overrides, RunConfig};
use crate::error::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "nongauss",
    version,
    about = "Non-Gaussianness of sums and Gaussian channel outputs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Divergence of normalized sums D(S_n) and its monotonicity.
    Sum(Overrides),
    /// MMSE and divergence curves over an SNR grid, with identity checks.
    Channel(Overrides),
    /// Full report for the O(Q^2/n) bound at each total SNR Q.
    Theorem1(Overrides),
    /// Capacity excess of channels with aggregated interference.
    Capacity(Overrides),
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("NONGAUSS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "NONGAUSS_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> CliResult<()> {
    let (name, overrides) = match &cli.command {
        Command::Sum(o) => ("sum", o),
        Command::Channel(o) => ("channel", o),
        Command::Theorem1(o) => ("theorem1", o),
        Command::Capacity(o) => ("capacity", o),
    };
    let cfg = RunConfig::load(overrides)?;
    configure_threads()?;
    let artifacts = match name {
        "sum" => commands::cmd_sum(&cfg)?,
        "channel" => commands::cmd_channel(&cfg)?,
        "theorem1" => commands::cmd_theorem1(&cfg)?,
        _ => commands::cmd_capacity(&cfg)?,
    };
    output::write_all(&cfg.output.dir, &artifacts)?;
    for a in &artifacts {
        println!("{}", cfg.output.dir.join(&a.name).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
