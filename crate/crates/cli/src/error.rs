use std::process::ExitCode;

use dexkit::DexError;
use thiserror::Error;

pub const EXIT_FATAL: u8 = 1;
pub const EXIT_PARTIAL: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unknown names, unreadable config. Nothing was attempted.
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Fatal(#[from] DexError),
    #[error("IoError: {0}")]
    Io(#[from] std::io::Error),
    #[error("IoError: {0}")]
    Csv(#[from] csv::Error),
    #[error("IoError: {0}")]
    Image(#[from] image::ImageError),
}

impl CliError {
    pub fn usage(err: impl std::fmt::Display) -> Self {
        CliError::Usage(err.to_string())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(EXIT_USAGE),
            _ => ExitCode::from(EXIT_FATAL),
        }
    }
}

/// How a command that ran to completion went.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Some items failed, the rest were written.
    Partial,
}

impl From<Outcome> for ExitCode {
    fn from(outcome: Outcome) -> Self {
        match outcome {
            Outcome::Success => ExitCode::SUCCESS,
            Outcome::Partial => ExitCode::from(EXIT_PARTIAL),
        }
    }
}

pub type CliResult = Result<Outcome, CliError>;
