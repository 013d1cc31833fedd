use thiserror::Error;

/// Errors raised by the numerical kernels and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("convergence failure: {0}")]
    Convergence(String),

    /// A truncation certificate could not be established; a larger horizon may help.
    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("inconsistency: {0}")]
    Inconsistency(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition violated: {what} (measured defect {defect:.3e})")]
    Precondition { what: String, defect: f64 },

    /// Disagreeing stationary values where the theory predicts a unique one.
    #[error("anomaly: {0}")]
    Anomaly(String),

    /// Data not resolved by the grid: mass near the boundary or sub-cell sampling.
    #[error("truncation: {0}")]
    Truncation(String),

    #[error("out of local regime: relative distance {0:.4} exceeds the admissible radius")]
    OutOfRegime(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
