use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate scan at stamp {stamp}: {finite} usable returns, need at least 2")]
    DegenerateScan { stamp: u64, finite: usize },

    #[error("empty IMU stream")]
    EmptyImuStream,

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("pose graph is disconnected: node {0} is unreachable from the anchor")]
    DisconnectedGraph(usize),

    #[error("invalid pose graph: {0}")]
    InvalidGraph(String),

    #[error("alignment failed: rms {rms:.4} m exceeds {limit:.4} m")]
    AlignmentFailed { rms: f64, limit: f64 },

    #[error("non-monotonic time: {0}")]
    NonMonotonicTime(String),

    #[error("sensor placement invalid: {0}")]
    SensorPlacement(String),

    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("{file}: missing key `{key}`")]
    MissingKey { file: String, key: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image {path}: {message}")]
    Image { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn parse(file: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
