//! Command-line driver tying ingestion, simulation, fitting, validation, and
//! scenario sweeps into reproducible runs.
//!
//! Exit codes: 0 success, 1 user/config error, 2 numerical failure
//! (an MCMC initial state with zero likelihood).

mod commands;
mod config;
mod manifest;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "macpp",
    version,
    about = "Multilayer cluster point process toolkit: simulate, fit, validate, benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a dataset from a configured model or a built-in scenario.
    Simulate(commands::simulate::SimulateArgs),
    /// Sample the posterior for a pattern under a configured model.
    Fit(commands::fit::FitArgs),
    /// Compare observed and model-expected counts for a fitted model.
    Validate(commands::validate::ValidateArgs),
    /// Run benchmark scenario sweeps (optionally with the NSP baseline).
    Scenarios(commands::scenarios::ScenariosArgs),
}

fn init_thread_pool() {
    if let Ok(v) = std::env::var("MACPP_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: ignoring invalid MACPP_THREADS value `{v}`"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_thread_pool();
    let result = match &cli.command {
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Fit(args) => commands::fit::run(args),
        Command::Validate(args) => commands::validate::run(args),
        Command::Scenarios(args) => commands::scenarios::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let numerical = err
                .chain()
                .any(|c| matches!(c.downcast_ref(), Some(macpp_core::Error::Initialization(_))));
            if numerical {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
