use thiserror::Error;

/// Errors raised by model parsing, precondition checks and numerical cross-checks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error("invalid metric: {0}")]
    Metric(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("model is not unimodular; {0} requires integration of exact top forms to vanish")]
    NotUnimodular(&'static str),

    /// Two independent numerical routes disagree beyond tolerance.
    #[error("cross-check failed: {0}")]
    CrossCheck(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

impl Error {
    pub(crate) fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
