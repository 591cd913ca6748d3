use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("dense eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("matrix dimension {dim} exceeds the dense-solver ceiling {ceiling}")]
    TooLarge { dim: usize, ceiling: usize },

    #[error("ambiguous seed for branch {branch}: candidates {candidates:?}")]
    AmbiguousSeed {
        branch: usize,
        candidates: Vec<(usize, f64)>,
    },

    #[error("branch {branch} is not labeled up to n = {needed}")]
    MissingLabel { branch: usize, needed: usize },

    #[error("resonant denominator in {0}")]
    ResonantDenominator(&'static str),

    #[error("unknown observable `{0}`")]
    UnknownObservable(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("integrator aborted at t = {t}: {reason}")]
    IntegratorAbort { t: f64, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status for the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::IntegratorAbort { .. } => 3,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => 4,
            Error::Eigensolver(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.to_owned(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
