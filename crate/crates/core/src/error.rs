use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A kernel table or kernel file failed validation.
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    /// A generator curve or body failed validation.
    #[error("invalid body: {0}")]
    InvalidBody(String),

    /// A construction parameter violated a stated precondition.
    /// The message names the binding constraint.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// The requested height lies in the wrong regime for the operation
    /// (single-impact bodies switch representation at the threshold height).
    #[error("regime error: {0}")]
    Regime(String),

    /// Too many traced rays failed to leave the body; the final-velocity map
    /// is suspected to be undefined on a positive-measure set.
    #[error("regularity violation: {hint} (offending abscissas: {xs:?})")]
    RegularityViolation { hint: String, xs: Vec<f64> },

    /// An iteration failed to converge or a bracket could not be established.
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
