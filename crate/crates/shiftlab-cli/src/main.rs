mod args;
mod commands;
mod config;
mod selftest;

use std::process::ExitCode;

/// Failure classes and their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// bad arguments, unreadable files, library errors (exit 1)
    Usage(String),
    /// a checked claim did not hold (exit 2)
    Verify(String),
}

impl From<shiftlab::Error> for CliError {
    fn from(e: shiftlab::Error) -> Self {
        match e {
            shiftlab::Error::Certification(m) => CliError::Verify(format!("certification failed: {m}")),
            other => CliError::Usage(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let argv = match config::expand(argv) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let cli = match <args::Cli as clap::Parser>::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            eprintln!("run with --help for usage");
            ExitCode::from(1)
        }
        Err(CliError::Verify(m)) => {
            eprintln!("verification failed: {m}");
            ExitCode::from(2)
        }
    }
}
