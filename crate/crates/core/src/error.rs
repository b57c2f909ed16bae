use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violates a precondition (wrong sign, out of range, not
    /// normalized, non-stationary where stationarity is required, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested computation needs more states than the configured cap.
    #[error("capacity exceeded: {what} needs {requested} states (limit {limit})")]
    Capacity {
        what: String,
        requested: u128,
        limit: u64,
    },

    /// No power of the matrix up to the Wielandt bound is strictly positive.
    #[error("matrix is not primitive (no positive power up to {bound})")]
    NotPrimitive { bound: usize },

    /// An iterative solver hit its iteration cap.
    #[error("no convergence after {iterations} iterations (last step {last_delta:e})")]
    NonConvergence { iterations: usize, last_delta: f64 },

    /// A measure, g-function or scheme description could not be parsed.
    #[error("invalid input: {0}")]
    Parse(String),

    /// A certificate envelope is contradicted by a directly computed value.
    #[error("envelope inconsistency: {0}")]
    Envelope(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
