//! Configuration-driven front end for the expansion engine.
//!
//! A run is described by one TOML file (see [`config::RunConfig`]). The four
//! subcommands build the expansion, verify it against a numerical trajectory,
//! convert it to real form, and compute the smallness certificate.

pub mod commands;
pub mod config;
pub mod format;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input; the message starts with the offending config path.
    #[error("validation error: {0}")]
    Validation(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

pub fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}
