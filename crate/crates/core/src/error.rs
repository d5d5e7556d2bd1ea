//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violates a mathematical precondition (bad normalization,
    /// negative weight, symbol out of range, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A requested index or depth exceeds what the data structure holds.
    #[error("range error: {0}")]
    Range(String),

    /// A configured constraint is violated (parameter couplings, parity
    /// conditions, smoothing widths, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// The map failed the hyperbolicity growth test.
    #[error("hyperbolicity error: {0}")]
    NotHyperbolic(String),

    /// A symbol stream or working window is too short; carries the number of
    /// additional symbols needed.
    #[error("needs {deficit} more symbol(s): {context}")]
    NeedsMoreSymbols { deficit: usize, context: String },

    /// An enumeration exceeded its configured cap.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// A numerical kernel failed to reach its required residual.
    #[error("numeric error: {0}")]
    Numeric(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
