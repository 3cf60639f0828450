use std::path::PathBuf;

use doless_core::Error;

/// Failure of a command, carrying its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags or malformed input files.
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    /// The selection or statistics step itself failed.
    #[error("{0}")]
    Algorithm(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Algorithm(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, e: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.into(),
            message: e.to_string(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match &e {
            Error::Io { path, source } => CliError::io(path.clone(), source),
            Error::Parse { .. } | Error::Validation { .. } | Error::InvalidConfig(_) => {
                CliError::Usage(e.to_string())
            }
            Error::InvalidTrace(_)
            | Error::DimensionMismatch { .. }
            | Error::InvalidInput(_)
            | Error::NoConvergence { .. }
            | Error::AllSelectionsEmpty { .. } => CliError::Algorithm(e.to_string()),
        }
    }
}

/// Maps a CSV error on `path` to I/O or malformed-input.
pub(crate) fn csv_error(path: impl Into<PathBuf>, e: csv::Error) -> CliError {
    let path = path.into();
    if e.is_io_error() {
        CliError::io(path, e)
    } else {
        CliError::Usage(format!("{}: malformed CSV: {e}", path.display()))
    }
}
