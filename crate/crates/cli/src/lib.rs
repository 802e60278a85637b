//! Command-line front end: definition files, reports and phase-portrait
//! export on top of the `perpetua` library.

pub mod commands;
pub mod files;

use perpetua::Error;

/// Failure of a command, carrying its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed or inconsistent input: exit code 2.
    #[error("{0}")]
    Input(String),
    /// Writing output failed: exit code 2.
    #[error("{0}")]
    Io(String),
    /// A numerical step failed on valid input: exit code 1.
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 1,
            CliError::Input(_) | CliError::Io(_) => 2,
        }
    }

    pub(crate) fn from_library(e: Error) -> CliError {
        match e {
            Error::Parse(_)
            | Error::Component { .. }
            | Error::Definition(_)
            | Error::Region(_)
            | Error::Config(_)
            | Error::NotLinear { .. }
            | Error::InverseMismatch { .. } => CliError::Input(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}
