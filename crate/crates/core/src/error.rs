//! Error type shared across the library.

/// Errors surfaced by library operations.
///
/// Usage errors (mismatched spaces, out-of-range parameters, empty inputs)
/// are distinguished from descriptor parse failures and from solver-side
/// failures so that callers can map them to exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Two points or objects from different spaces were combined.
    #[error("space mismatch: expected {expected}, found {found}")]
    SpaceMismatch { expected: String, found: String },

    /// Coordinates rejected by the space they were built for.
    #[error("invalid coordinates: {0}")]
    InvalidCoords(String),

    /// A parameter violated an operation precondition.
    #[error("usage error: {0}")]
    Usage(String),

    /// A structured-text descriptor failed to parse.
    #[error("descriptor error: {0}")]
    Descriptor(String),

    /// No finite objective value could be located for a functional.
    #[error("functional not proper on sampled domain: {0}")]
    NotProper(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn descriptor(msg: impl Into<String>) -> Self {
        Error::Descriptor(msg.into())
    }
}
