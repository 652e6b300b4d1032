use std::path::Path;

use heartid_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// Process exit status.
pub mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const DATA: u8 = 2;
    pub const INTERNAL: u8 = 3;
}

fn core_code(e: &CoreError) -> u8 {
    match e {
        CoreError::Sample { source, .. } => core_code(source),
        // parameter values the user chose
        CoreError::InvalidConfig(_)
        | CoreError::InvalidProfile(_)
        | CoreError::KPrimeTooLarge { .. }
        | CoreError::InvalidHop(_)
        | CoreError::WindowTooLong { .. }
        | CoreError::NonDivisibleLength { .. }
        | CoreError::InvalidDuration(_)
        | CoreError::PerplexityTooLarge { .. }
        | CoreError::ScheduleEmpty => exit::USAGE,
        _ => exit::DATA,
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Core(e) => core_code(e),
            CliError::Io { .. } => exit::DATA,
            CliError::Internal(_) => exit::INTERNAL,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
