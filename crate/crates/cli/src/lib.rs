//! Command-line driver: synthesize, validate, evaluate, rank and report.

mod args;
mod commands;
mod output;

use std::ffi::OsString;
use std::fmt;

use clap::Parser;

pub use args::{Cli, Command};

/// A failed invocation and the exit status it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Malformed flags or configuration; exit status 2.
    Usage(String),
    /// Invalid input data or a failed computation; exit status 1.
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<juicespec_core::Error> for CliError {
    fn from(e: juicespec_core::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub(crate) fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

/// Runs a parsed command, inside a dedicated thread pool when `--threads`
/// is given.
pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.threads {
        None => commands::dispatch(cli.command),
        Some(0) => Err(usage("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Data(format!("cannot start {n} threads: {e}")))?
            .install(|| commands::dispatch(cli.command)),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
