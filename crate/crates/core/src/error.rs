use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported instruction: {0}")]
    Unsupported(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("calibration error at {location}: {message}")]
    Calibration { location: String, message: String },

    #[error("unknown coupling {0}-{1}")]
    UnknownPair(String, String),

    #[error("missing noise channel {0}")]
    MissingChannel(usize),

    #[error("data error: {0}")]
    Data(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("detector {0} cannot reach any partner in the matching graph")]
    Unreachable(usize),

    #[error("curve cannot be fitted: {0}")]
    Unfittable(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn calibration(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Calibration { location: location.into(), message: message.into() }
    }

    /// True for errors caused by bad input data rather than bad configuration.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Data(_) | Error::Unreachable(_) | Error::Format(_) | Error::Io { .. } | Error::Json(_) | Error::Unfittable(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
