use thiserror::Error;

/// Errors produced anywhere in the simulation stack.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or configuration value violates its invariant.
    #[error("{0}")]
    Validation(String),

    /// An input lies outside the domain of a closed-form expression.
    #[error("domain error: {0}")]
    Domain(String),

    /// Linear solve failure (zero pivot, length mismatch).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A non-finite value appeared during time stepping.
    #[error("divergence in {stage} stage at t = {t}")]
    Divergence { stage: &'static str, t: f64 },

    /// Not enough usable points, or non-positive samples, for a log fit.
    #[error("fit error: {0}")]
    Fit(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True when the error signals a numerical blow-up rather than bad input.
    pub fn is_divergence(&self) -> bool {
        matches!(self, Error::Divergence { .. } | Error::Numeric(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
