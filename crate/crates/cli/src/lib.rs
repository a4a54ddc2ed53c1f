//! Library side of the `relphase` batch CLI.
//!
//! Everything the binary does lives here so the acceptance suite can drive
//! the same code from integration tests: argument-level parsing helpers,
//! the deterministic report writer, the experiment commands, and the
//! acceptance criteria themselves.

pub mod acceptance;
pub mod commands;
pub mod parse;
pub mod report;

use std::fmt;

/// Errors split by exit code: invalid configuration (2) versus a numeric
/// tolerance breach discovered while running (3).
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Numeric(msg) => write!(f, "numeric tolerance breach: {msg}"),
        }
    }
}

impl From<relphase_core::Error> for CliError {
    fn from(err: relphase_core::Error) -> Self {
        use relphase_core::Error::*;
        match err {
            TruncationTail { .. }
            | EmbeddingLoss { .. }
            | NotPositive { .. }
            | NotHermitian { .. }
            | TraceNotOne { .. }
            | NotNormalized { .. }
            | ImaginaryResidue { .. } => CliError::Numeric(err.to_string()),
            _ => CliError::Config(err.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Config(err.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
