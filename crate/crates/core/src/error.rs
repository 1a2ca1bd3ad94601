use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Operands from different groups or spaces, or an argument outside the
    /// domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A word-length or ball query needed more than the configured radius.
    #[error("radius exceeded: element not found within radius cap {cap}")]
    RadiusExceeded { cap: usize },

    /// A configured budget (support size, element count, exact arithmetic
    /// range, sampling budget) was exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// An iterative solver stopped before meeting its tolerance.
    #[error("no convergence: {message} (last iterate {last_iterate}, gradient norm {gradient_norm:e})")]
    Convergence {
        message: String,
        last_iterate: String,
        gradient_norm: f64,
    },

    /// The requested operation is not available for this kind of space or group.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A configuration or descriptor failed validation.
    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
