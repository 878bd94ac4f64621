//! `confband`: estimation, band construction, condition checking, and
//! coverage simulation from the command line.
//!
//! Exit codes: 0 on success, 1 for usage or configuration errors, 2 for
//! data errors (unreadable or malformed inputs, degenerate estimates).

mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};

/// CLI-level error split by exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(1),
            CliError::Data(_) => ExitCode::from(2),
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) => m,
        }
    }
}

impl From<confband::Error> for CliError {
    fn from(e: confband::Error) -> CliError {
        use confband::Error as E;
        match &e {
            E::Csv { .. }
            | E::EmptySample
            | E::Io(_)
            | E::EmptyGrid
            | E::AllZeroEstimate
            | E::Replication { .. } => CliError::Data(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Kde(args) => commands::run_kde(args),
        Command::Band(args) => commands::run_band(args),
        Command::CheckConditions(args) => commands::run_check(args),
        Command::Simulate(args) => commands::run_simulate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}
