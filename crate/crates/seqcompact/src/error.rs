use std::io;
use std::path::{Path, PathBuf};

use crate::persist::PersistError;

/// Exit status for a usage error.
pub const EXIT_USAGE: i32 = 1;
/// Exit status for an I/O failure.
pub const EXIT_IO: i32 = 2;
/// Exit status for bad data or a violated invariant.
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Persist { path: PathBuf, source: PersistError },
    #[error("{context}{source}")]
    Data { context: String, source: seqcompact_core::Error },
    #[error("{0}")]
    Invariant(String),
}

impl AppError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        AppError::Io { path: path.to_path_buf(), source }
    }

    pub fn data_in(path: &Path, source: seqcompact_core::Error) -> Self {
        AppError::Data { context: format!("{}: ", path.display()), source }
    }

    pub fn persist(path: &Path, source: PersistError) -> Self {
        match source {
            PersistError::Io(e) => AppError::io(path, e),
            other => AppError::Persist { path: path.to_path_buf(), source: other },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => EXIT_USAGE,
            AppError::Io { .. } => EXIT_IO,
            AppError::Persist { .. } | AppError::Data { .. } | AppError::Invariant(_) => EXIT_DATA,
        }
    }
}

impl From<seqcompact_core::Error> for AppError {
    fn from(source: seqcompact_core::Error) -> Self {
        AppError::Data { context: String::new(), source }
    }
}
