//! `treedyn`: analyses and experiments for piecewise-linear tree maps.

mod analyze;
mod classify;
mod config;
mod entropy;
mod output;
mod verify;

use std::process::ExitCode;

use clap::Parser;

use config::{load_continuum, load_map, Cli, Command, RunConfig};

#[derive(Debug)]
pub enum Failure {
    Input(String),
    Analysis(treedyn_core::Error),
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Undecided,
    Violation,
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let options = cli.command.options();
    let config = RunConfig::from_options(cli.command.name(), options)?;
    if options.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(options.workers)
            .build_global()
            .map_err(|e| Failure::Input(format!("--workers: {e}")))?;
    }
    let f = load_map(options)?;
    let out = options.out.as_path();
    match &cli.command {
        Command::Analyze(_) => analyze::run(&f, &config, out),
        Command::Classify(_) => {
            let a = load_continuum(options, f.tree())?;
            classify::run(&f, a, &config, out)
        }
        Command::Entropy(_) => entropy::run_entropy(&f, &config, out),
        Command::Envelope(_) => entropy::run_envelope(&f, &config, out),
        Command::VerifyInvariants(_) => verify::run(&f, &config, out),
    }
}

fn is_input_error(e: &treedyn_core::Error) -> bool {
    use treedyn_core::Error::*;
    matches!(e, Spec(_) | NonpositiveEpsilon | EpsilonTooLarge | PeriodCapExceeded { .. } | BadRational(_))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Undecided) => {
            eprintln!("treedyn: result undecided within the budget");
            ExitCode::from(3)
        }
        Ok(Outcome::Violation) => {
            eprintln!("treedyn: invariant violated, see invariants.json");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("treedyn: invalid input: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Analysis(e)) if is_input_error(&e) => {
            eprintln!("treedyn: invalid input: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Analysis(e)) => {
            eprintln!("treedyn: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("treedyn: {msg}");
            ExitCode::from(1)
        }
    }
}
