use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error at {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] nudlab_core::Error),
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        LabError::Io { path: path.into(), message: err.to_string() }
    }

    /// Process exit code: configuration and usage problems are 2, everything else 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Usage(_) | LabError::Config(_) => 2,
            LabError::Core(nudlab_core::Error::InvalidParameter(_) | nudlab_core::Error::Config(_)) => 2,
            _ => 1,
        }
    }
}

pub type LabResult<T> = Result<T, LabError>;
