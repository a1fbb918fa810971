use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("chain of {requested} spins exceeds the dense capacity of {limit}")]
    Capacity { requested: usize, limit: usize },

    #[error("invalid {what}: {detail}")]
    Invalid { what: &'static str, detail: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("ground space is degenerate (gap {gap:.3e} below tolerance {tolerance:.1e})")]
    DegenerateGroundState { gap: f64, tolerance: f64 },

    #[error("map is not trace preserving (deviation {deviation:.3e})")]
    NotTracePreserving { deviation: f64 },

    #[error("observable eigenvalue {value} is not an integer")]
    NonIntegerSpectrum { value: f64 },

    #[error("distribution has no outcomes")]
    EmptyDistribution,

    #[error("schedule has no crossing where g(s) = delta(s)")]
    NoCrossing,

    #[error("need at least {required} groups for the {test} test, got {found}")]
    InsufficientGroups {
        test: &'static str,
        required: usize,
        found: usize,
    },

    #[error(
        "no simple path of length {length} found after {restarts} restarts (longest reached {longest})"
    )]
    EmbeddingFailed {
        length: usize,
        restarts: usize,
        longest: usize,
    },
}

impl Error {
    pub(crate) fn invalid(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            detail: detail.into(),
        }
    }
}
