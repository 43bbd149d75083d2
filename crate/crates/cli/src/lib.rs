//! Command-line front end for `compois_garma`: data ingestion, JSON run
//! configuration, and the plot-ready CSV / JSON outputs of each command.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 numerical failure.

pub mod cli;
pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod output;
pub mod samples;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use config::RunConfig;
pub use data::{load_csv, DataError};
pub use error::CliError;

pub fn dispatch(cli: cli::Cli, out: &mut dyn Write) -> Result<(), CliError> {
    use cli::Command::*;
    match &cli.command {
        Fit(a) => commands::fit(a, out),
        Predict(a) => commands::predict(a, out),
        Simulate(a) => commands::simulate(a, out),
        Pmf(a) => commands::pmf(a, out),
        Diagnose(a) => commands::diagnose(a, out),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
/// Command output goes to `out`, errors to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match cli::Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => 0,
        Err(e) if e.is_broken_pipe() => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
