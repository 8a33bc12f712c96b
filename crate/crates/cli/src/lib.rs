//! Front end for the `transjulia` library: configuration, subcommands and
//! the `verify` suite. The binary in `main.rs` only parses arguments.

// NaN must be rejected, hence `!(x > 0.0)` rather than `x <= 0.0`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use std::fmt;

pub use config::RunConfig;

/// Failure of a subcommand, mapped to the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or configuration (exit 2).
    Usage(String),
    /// A module error from the numerical pipeline (exit 3).
    Numerical(transjulia::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<transjulia::Error> for CliError {
    fn from(e: transjulia::Error) -> Self {
        CliError::Numerical(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numerical(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Numerical(e.into())
    }
}

/// Result of a finished subcommand.
#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<std::path::PathBuf>,
    /// 0, or 1 when `verify` found a failing check.
    pub exit_code: i32,
}
