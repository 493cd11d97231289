use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Model or plan parameters violate a documented invariant.
    #[error("configuration error: {0}")]
    Config(String),

    /// Array dimensions disagree.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Too few rows supplied (e.g. missing filter warm-up rows).
    #[error("insufficient rows: need at least {needed}, got {got}")]
    Length { needed: usize, got: usize },

    /// Estimation failed, e.g. a singular Gram matrix.
    #[error("estimation error: {0}")]
    Estimation(String),

    /// An operation was called outside its domain (e.g. univariate routine with k > 1).
    #[error("usage error: {0}")]
    Usage(String),

    /// Coordinate descent hit its sweep limit.
    #[error(
        "coordinate descent did not converge after {iterations} sweeps (KKT residual {residual:e})"
    )]
    Convergence {
        iterations: usize,
        residual: f64,
        last_iterate: Vec<f64>,
    },

    /// Limit objective is not well defined for the requested parameters.
    #[error("unsupported limit regime: {0}")]
    UnsupportedRegime(String),

    /// Wraps an error with location information (cell, replication, ...).
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping any context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
