mod args;
mod cmd_fields;
mod cmd_mild;
mod cmd_ml;
mod cmd_simulate;
mod config;

use std::io::Write;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

/// Outcome of a command that completed without error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    NotMild,
}

#[derive(Debug, Parser)]
#[command(
    name = "fracfield",
    version,
    about = "Time-space fractional stochastic diffusion toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate Mittag-Leffler functions, bounds, asymptotics and real zeros
    Ml(cmd_ml::MlArgs),
    /// Classify mildness and optionally run the divergence probes
    Mild(cmd_mild::MildArgs),
    /// Mean field profiles
    Mean(cmd_fields::MeanArgs),
    /// Variance field profiles
    Variance(cmd_fields::VarianceArgs),
    /// Spectral Monte Carlo simulation
    Simulate(cmd_simulate::SimulateArgs),
}

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<Status> {
    match &cli.command {
        Command::Ml(a) => cmd_ml::run(a, stdout),
        Command::Mild(a) => cmd_mild::run(a, stdout),
        Command::Mean(a) => cmd_fields::run_mean(a, stdout),
        Command::Variance(a) => cmd_fields::run_variance(a, stdout),
        Command::Simulate(a) => cmd_simulate::run(a, stdout),
    }
}

/// Exit code for a failed command: 4 resonance, 3 not mild, 2 otherwise.
pub fn error_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<fracfield::Error>() {
        Some(fracfield::Error::Resonance { .. }) => 4,
        Some(fracfield::Error::NonMild(_)) => 3,
        _ => 2,
    }
}

fn status_code(s: Status) -> u8 {
    match s {
        Status::Ok => 0,
        Status::NotMild => 3,
    }
}

fn threads() -> Result<usize> {
    match std::env::var("FRACFIELD_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("FRACFIELD_THREADS must be a non-negative integer, got '{v}'")),
        Err(_) => Ok(0),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = threads().and_then(|n| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
        pool.install(|| run(&cli, &mut std::io::stdout().lock()))
    });
    match outcome {
        Ok(s) => ExitCode::from(status_code(s)),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error_code(&e))
        }
    }
}
