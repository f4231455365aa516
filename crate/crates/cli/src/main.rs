//! `polywg`: weak Galerkin Stokes runs from the command line.

mod commands;
mod config;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use config::{Command, Flags, RunConfig};

/// Weak Galerkin Stokes solver on polygonal meshes.
///
/// Settings come from an optional JSON file (`--config`) overlaid by flags.
/// The thread count can be capped with POLYWG_THREADS.
#[derive(Debug, Parser)]
#[command(name = "polywg", version)]
struct Cli {
    /// what to run; may instead be given as "command" in the config file
    #[arg(value_enum)]
    command: Option<Command>,
    #[command(flatten)]
    flags: Flags,
}

fn init_threads(serial: bool) -> Result<()> {
    let threads = if serial {
        Some(1)
    } else {
        match std::env::var("POLYWG_THREADS") {
            Ok(v) => Some(v.trim().parse::<usize>().with_context(|| format!("POLYWG_THREADS={v}"))?),
            Err(_) => None,
        }
    };
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let base = match &cli.flags.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let cfg = base.apply(cli.command, &cli.flags).resolve()?;
    init_threads(cfg.serial)?;
    commands::execute(&cfg)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("polywg: some checks failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("polywg: {e:#}");
            ExitCode::FAILURE
        }
    }
}
