use thiserror::Error;

/// Errors raised by the library.
///
/// The CLI maps `InvalidArgument`, `Io` and `Parse` to exit code 2 and the
/// data-dependent failures to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate dataset: {0}")]
    Degenerate(String),
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),
    #[error("undefined effect size: {0}")]
    UndefinedEffect(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Parse(_) | Error::Io(_) | Error::Json(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn degenerate(msg: impl Into<String>) -> Error {
    Error::Degenerate(msg.into())
}
