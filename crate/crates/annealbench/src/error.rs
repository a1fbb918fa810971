use std::path::PathBuf;

use annealbench_core::Error as CoreError;

pub const EXIT_OK: i32 = 0;
/// Numerical or other runtime failures.
pub const EXIT_FAILURE: i32 = 1;
/// Bad arguments, malformed input files, failed preconditions.
pub const EXIT_VALIDATION: i32 = 2;
/// A chain too large for dense simulation.
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{}", located(path, *line, message))]
    Format {
        path: PathBuf,
        line: Option<usize>,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] CoreError),
}

fn located(path: &std::path::Path, line: Option<usize>, message: &str) -> String {
    match line {
        Some(line) => format!("{}:{line}: {message}", path.display()),
        None => format!("{}: {message}", path.display()),
    }
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) | AppError::Format { .. } => EXIT_VALIDATION,
            AppError::Io { .. } => EXIT_IO,
            AppError::Core(e) => match e {
                CoreError::Capacity { .. } => EXIT_CAPACITY,
                CoreError::Invalid { .. }
                | CoreError::DimensionMismatch { .. }
                | CoreError::NoCrossing
                | CoreError::InsufficientGroups { .. }
                | CoreError::EmptyDistribution => EXIT_VALIDATION,
                CoreError::DegenerateGroundState { .. }
                | CoreError::NotTracePreserving { .. }
                | CoreError::NonIntegerSpectrum { .. }
                | CoreError::EmbeddingFailed { .. } => EXIT_FAILURE,
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, line: Option<usize>, message: impl Into<String>) -> Self {
        AppError::Format {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T, E = AppError> = std::result::Result<T, E>;
