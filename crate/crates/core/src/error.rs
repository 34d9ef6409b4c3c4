use thiserror::Error;

/// Failure modes shared by every module of the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A configuration value violates a documented constraint.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// A point lies outside the region where a truncated sum is trusted.
    #[error("extrapolation: {0}")]
    Extrapolation(String),
    /// The requested (p, k, dim) triple is outside the range covered by the error estimate.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    /// A computed quantity failed an accuracy or acceptance check.
    #[error("accuracy failure: {0}")]
    Accuracy(String),
    /// An invariant that should hold unconditionally did not.
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line harness.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Hypothesis(_) => 2,
            Error::Accuracy(_) => 3,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => 4,
            _ => 1,
        }
    }
}

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {value}")))
    }
}
