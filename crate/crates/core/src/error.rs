use thiserror::Error;

/// Errors raised by the filter toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A stored object violates one of its structural invariants.
    #[error("invariant violation: {0}")]
    Invariant(String),

    /// Unknown builtin name.
    #[error("unknown {kind} '{name}'")]
    Lookup { kind: &'static str, name: String },

    /// Malformed input file.
    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    /// A numerical procedure broke down (singular system, degenerate filter, ...).
    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
