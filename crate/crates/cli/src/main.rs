//! `emc`: command-line front end for entangled Markov chains.
//!
//! Exit status is 0 on success, 2 when an input fails validation and 3 when
//! a numerical invariant is violated.

mod args;
mod commands;
mod config;
mod report;
mod selftest;

use std::process::ExitCode;

use clap::Parser;

use args::{normalize_tol_flags, Cli, Command};
use config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    Validation,
    Numerical,
}

#[derive(Debug)]
pub struct Failure {
    pub kind: FailureKind,
    pub message: String,
}

impl Failure {
    pub fn validation(message: impl Into<String>) -> Self {
        Failure { kind: FailureKind::Validation, message: message.into() }
    }

    pub fn invariant(name: &str, residual: f64, tol: f64) -> Self {
        Failure {
            kind: FailureKind::Numerical,
            message: format!("invariant `{name}` violated: residual {residual:e} exceeds {tol:e}"),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind {
            FailureKind::Validation => 2,
            FailureKind::Numerical => 3,
        }
    }
}

impl From<emc_core::Error> for Failure {
    fn from(e: emc_core::Error) -> Self {
        let kind = if e.is_numerical() { FailureKind::Numerical } else { FailureKind::Validation };
        Failure { kind, message: e.to_string() }
    }
}

/// Fails with the named invariant when `residual > tol`.
pub fn ensure(name: &str, residual: f64, tol: f64) -> Result<(), Failure> {
    if residual > tol || residual.is_nan() {
        return Err(Failure::invariant(name, residual, tol));
    }
    Ok(())
}

fn run(command: Command, config: RunConfig) -> Result<(), Failure> {
    let outputs = match command {
        Command::Classify => commands::classify(&config)?,
        Command::Density => commands::density(&config)?,
        Command::Correlate => commands::correlate(&config)?,
        Command::Cluster => commands::cluster(&config)?,
        Command::Groupwalk => commands::groupwalk(&config)?,
        Command::Selftest => selftest::run(&config)?,
    };
    outputs.emit(config.command, config.out.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse_from(normalize_tol_flags(std::env::args())) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let result = RunConfig::resolve(cli.command, cli.options).and_then(|config| run(cli.command, config));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("emc: {}", failure.message);
            ExitCode::from(failure.exit_code())
        }
    }
}
