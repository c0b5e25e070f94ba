//! `steinhaus`: verification suites, energy reports, simulations and parameter sweeps.

mod commands;
mod params;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use params::{ConfigFile, Params};

#[derive(Debug, Parser)]
#[command(name = "steinhaus", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the exhaustive counting, divisor and energy suites for one (q, N).
    Verify(RunArgs),
    /// Write the smooth/rough check tables, and optionally the Shiu table.
    Count(RunArgs),
    /// Compute the multiplicative energy of one set.
    Energy(RunArgs),
    /// Monte Carlo moments and distribution of the normalized Steinhaus sum over one set.
    Simulate(RunArgs),
    /// One row per point of the config file's ladder.
    Sweep(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON config with the same keys as the flags, plus "ladder" for sweeps. Flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    params: Params,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Verify(_) => "verify",
            Command::Count(_) => "count",
            Command::Energy(_) => "energy",
            Command::Simulate(_) => "simulate",
            Command::Sweep(_) => "sweep",
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Verify(a) | Command::Count(a) | Command::Energy(a) | Command::Simulate(a) | Command::Sweep(a) => a,
        }
    }
}

fn run(command: &Command) -> Result<bool> {
    let started = Instant::now();
    let args = command.args();
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let params = file.base.overlay(&args.params);
    if let Some(threads) = params.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let passed = match command {
        Command::Verify(_) => commands::verify(&params)?,
        Command::Count(_) => commands::count(&params)?,
        Command::Energy(_) => commands::energy(&params)?,
        Command::Simulate(_) => commands::simulate(&params)?,
        Command::Sweep(_) => commands::sweep(&params, &file.ladder)?,
    };
    commands::write_meta(&params, command.name(), started)?;
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
