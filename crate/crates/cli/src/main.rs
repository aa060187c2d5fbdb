mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;
use hyperlangevin::Error;

use crate::args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io(String),
    /// At least one applicable certificate was violated.
    Certificate(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Certificate(_) => 1,
            CliError::Core(Error::Capability { .. }) => 3,
            CliError::Core(Error::Numerical { .. }) => 1,
            CliError::Core(_) | CliError::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e @ Error::Capability { cap, .. }) => {
                write!(f, "{e} (dimension cap {cap})")
            }
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Certificate(m) => write!(f, "certificate failure:\n{m}"),
        }
    }
}

fn jobs(cmd: &Command) -> usize {
    match cmd {
        Command::Analyze(a) => a.common.output.jobs,
        Command::Sweep(a) | Command::Check(a) | Command::Bounds(a) => a.output.jobs,
        Command::Simulate(a) => a.common.output.jobs,
        Command::Ctmc(a) => a.output.jobs,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs(&cli.command)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(2);
        }
    };
    let result = pool.install(|| match &cli.command {
        Command::Analyze(a) => commands::analyze(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Check(a) => commands::check(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Ctmc(a) => commands::ctmc(a),
        Command::Bounds(a) => commands::bounds(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
