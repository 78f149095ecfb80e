use thiserror::Error;

/// Errors surfaced by construction and simulation entry points.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    /// Mismatched dimensions or otherwise malformed arguments.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Construction-time validation failure (masses, normalization, ranges).
    #[error("validation failed: {0}")]
    Validation(String),

    /// A size cap was exceeded (player count, table size, LP constraints).
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    /// An operation precondition was violated by the caller.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Inputs failed a symmetry requirement of a classification operation.
    #[error("classification error: {0}")]
    Classification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
