use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration:\n{}", .0.iter().map(|e| format!("  - {e}")).collect::<Vec<_>>().join("\n"))]
    Config(Vec<String>),

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] aprid_core::Error),

    #[error("{0}")]
    Report(String),

    #[error("{failed} of {total} runs diverged")]
    Divergence { failed: usize, total: usize },
}

impl BenchError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(vec![msg.into()])
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for configuration problems, 3 for divergence,
    /// 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Parse { .. } => 2,
            Self::Core(
                aprid_core::Error::InvalidParameter(_)
                | aprid_core::Error::Unsupported(_)
                | aprid_core::Error::MemoryBudget { .. }
                | aprid_core::Error::DimensionMismatch { .. }
                | aprid_core::Error::NonPositiveEta { .. },
            ) => 2,
            Self::Divergence { .. } | Self::Core(aprid_core::Error::Divergence { .. }) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
