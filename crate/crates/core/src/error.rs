use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A dense computation was requested beyond the supported size.
    #[error("capacity exceeded: {context} requires {requested} qubits, limit is {limit}")]
    Capacity {
        context: &'static str,
        requested: usize,
        limit: usize,
    },

    /// Invalid argument value (out-of-range parameter, bad probability, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Input does not have the structural shape an operation requires
    /// (e.g. a circuit that is not IQP-shaped).
    #[error("structural error: {0}")]
    Structure(String),

    /// Circuit text format could not be parsed.
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A numerical precondition failed (singular state, non-Hermitian input, ...).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Lattice geometry is required but missing.
    #[error("geometry error: {0}")]
    Geometry(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn capacity(context: &'static str, requested: usize, limit: usize) -> Self {
        Error::Capacity {
            context,
            requested,
            limit,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn structure(msg: impl Into<String>) -> Self {
        Error::Structure(msg.into())
    }
}
