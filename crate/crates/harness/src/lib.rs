//! Library surface of the experiment harness: configuration, run
//! execution, trace/summary serialization and the canned verification
//! suite. The `fracdim` binary is a thin CLI over these modules.

pub mod check;
pub mod config;
pub mod runner;
pub mod trace_io;

use std::process::ExitCode;

use clap::ValueEnum;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Io(_) => ExitCode::from(3),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Io(err) => write!(f, "i/o error: {err}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

impl OutputFormat {
    pub fn writes_csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    pub fn writes_json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}
