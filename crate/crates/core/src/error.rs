use thiserror::Error;

/// Errors raised by the qdo-core pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Operands have incompatible sizes.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Failed to parse textual input (Pauli letters, separations, ...).
    #[error("parse error: {0}")]
    Parse(String),

    /// Coupling at or beyond dissociation (|gamma| >= 2).
    #[error("coupling {gamma} is dissociative (|gamma| must be below 2)")]
    Dissociative { gamma: f64 },

    /// A variational run produced a non-finite energy.
    #[error("non-finite energy at step {step}")]
    NonFinite { step: usize, trace: Vec<f64> },

    /// A problem is too large for dense treatment.
    #[error("dimension {dim} exceeds the dense limit {limit}")]
    TooLarge { dim: usize, limit: usize },

    #[error("malformed JSON")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
