//! `bindweed` — experiment driver for cascades, walks and chaos iteration.
//!
//! Every subcommand reads one strict TOML config and writes one CSV.
//! Exit codes: 0 success, 1 runtime/capacity failure, 2 config error.

mod commands;
mod config;
mod report;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Runtime(msg) => write!(f, "runtime error: {msg}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "bindweed", version, about = "Cascade and random-walk experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Worker-thread bound; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate k(s) on a grid of s values.
    EstimateK(RunArgs),
    /// Estimate λ, growth and branching rates, and print the phase verdict.
    Classify(RunArgs),
    /// Stream one exact quenched cascade, level by level.
    Cascade(RunArgs),
    /// Simulate the walk, or solve a truncated chain exactly.
    Bindweed(RunArgs),
    /// Iterate the chaos fixed-point map on a particle population.
    Chaos(RunArgs),
}

fn run(cmd: &Command) -> Result<(), CliError> {
    let (args, runner): (&RunArgs, fn(&str) -> Result<String, CliError>) = match cmd {
        Command::EstimateK(a) => (a, commands::cmd_estimate_k),
        Command::Classify(a) => (a, commands::cmd_classify),
        Command::Cascade(a) => (a, commands::cmd_cascade),
        Command::Bindweed(a) => (a, commands::cmd_bindweed),
        Command::Chaos(a) => (a, commands::cmd_chaos),
    };

    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;

    let csv = match args.threads {
        Some(n) => {
            if n == 0 {
                return Err(CliError::Config("--threads must be >= 1".to_string()));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            pool.install(|| runner(&text))?
        }
        None => runner(&text)?,
    };

    fs::write(&args.out, csv)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", args.out.display())))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            match e {
                CliError::Runtime(_) => ExitCode::from(1),
                CliError::Config(_) => ExitCode::from(2),
            }
        }
    }
}
