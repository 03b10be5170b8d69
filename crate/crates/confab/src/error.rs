use std::path::PathBuf;

use thiserror::Error;

use crate::openalex::OpenAlexError;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("data error: {0}")]
    Data(String),
    #[error(transparent)]
    Core(#[from] confab_core::Error),
    #[error(transparent)]
    Service(#[from] OpenAlexError),
    #[error("missing fixtures ({} request(s)):\n{}", .0.len(), .0.join("\n"))]
    MissingFixtures(Vec<String>),
    #[error("missing upstream artifacts: {}", .0.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", "))]
    MissingArtifacts(Vec<PathBuf>),
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl AppError {
    pub fn data(msg: impl Into<String>) -> Self {
        AppError::Data(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 usage, 2 data, 3 fixture or network.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Service(_) | AppError::MissingFixtures(_) => 3,
            AppError::Data(_) | AppError::Core(_) | AppError::MissingArtifacts(_) | AppError::Io { .. } => 2,
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;
