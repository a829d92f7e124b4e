//! Command-line front end: CSV ingestion, TOML configuration with flag
//! overrides, and text, CSV and JSON-lines reports for the `test`, `ktest`,
//! `simulate` and `gen` subcommands.
//!
//! Exit codes: `0` success (whatever the decision), `1` output failure,
//! `2` configuration or usage error, `3` data error.

pub mod args;
pub mod commands;
pub mod config;
pub mod ingest;
pub mod report;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;
use thiserror::Error;

pub use args::{Cli, Command, Format};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Output(_) => 1,
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
        }
    }

    /// Classifies a library error raised while configuring a run.
    pub fn config(err: disttrans::Error) -> Self {
        CliError::Config(err.to_string())
    }

    /// Classifies a library error raised once the data are loaded. Sample
    /// defects are data errors; everything else traces back to settings.
    pub fn from_run(err: disttrans::Error) -> Self {
        use disttrans::Error as E;
        match err {
            E::EmptySample | E::NonFinite { .. } | E::PairLengthMismatch { .. } | E::Domain(_) => {
                CliError::Data(err.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Parses `argv`, runs the command and writes its report. Returns the exit
/// code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match commands::execute(&cli).and_then(|out| emit(&cli, &out)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("disttrans: {e}");
            e.exit_code()
        }
    }
}

fn emit(cli: &Cli, body: &str) -> CliResult<()> {
    match &cli.common.out {
        Some(path) => {
            std::fs::write(path, body).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Output(e.to_string()))
        }
    }
}
