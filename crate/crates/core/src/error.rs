use thiserror::Error;

/// Errors produced by estimators, tests, simulators and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates the documented domain of an operation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The input is valid but the computation is degenerate (zero denominators,
    /// no exceedances, singular kernel moments).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Malformed or unusable data (non-numeric cells, missing values).
    #[error("data error: {0}")]
    Data(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    /// True for errors caused by the caller's configuration rather than by the data.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::InvalidParameter(_) | Error::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
