use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use okpc_cli::commands;
use okpc_cli::config::RunConfig;

#[derive(Parser)]
#[command(name = "okpc", version, about = "Preconditioned Ohta-Kawasaki phase-field solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate in time and write series, snapshots and stats.
    Run(Args),
    /// Dense preconditioned spectra and eigenvalue-bound checks.
    Spectrum(Args),
    /// Iteration-count sweep over mesh size, parameters and preconditioner.
    Bench(Args),
    /// Condition numbers of the block system for several mesh sizes.
    CondTable(Args),
}

#[derive(clap::Args)]
struct Args {
    /// JSON configuration file.
    config: PathBuf,
    /// Override a config entry, e.g. `--set params.sigma=400`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (args, f): (&Args, fn(&RunConfig) -> Result<(), okpc_cli::CliError>) = match &cli.command {
        Command::Run(a) => (a, commands::run),
        Command::Spectrum(a) => (a, commands::spectrum),
        Command::Bench(a) => (a, commands::bench),
        Command::CondTable(a) => (a, commands::cond_table),
    };
    let result = RunConfig::load(&args.config, &args.set).and_then(|cfg| f(&cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("okpc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
