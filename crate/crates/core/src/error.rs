use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain an operation accepts.
    #[error("invalid input: {0}")]
    InputDomain(String),

    #[error("calibration failed: {0}")]
    CalibrationFailed(String),

    #[error(transparent)]
    Pnm(#[from] PnmError),

    #[error(transparent)]
    Workload(#[from] WorkloadError),

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::InputDomain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by unreadable or malformed files, as opposed
    /// to well-formed input whose values are out of range.
    pub fn is_io_or_parse(&self) -> bool {
        match self {
            Error::Io { .. } | Error::Pnm(_) | Error::Workload(_) => true,
            Error::Config(e) => matches!(e, ConfigError::Io { .. } | ConfigError::Syntax { .. }),
            Error::InputDomain(_) | Error::CalibrationFailed(_) => false,
        }
    }
}

/// Netpbm decoding failures. Offsets are byte positions in the input.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PnmError {
    #[error("not a netpbm file: bad magic at byte 0")]
    BadMagic,

    #[error("unsupported format {magic}: {hint}")]
    Unsupported { magic: String, hint: &'static str },

    #[error("malformed header at byte {offset}: {reason}")]
    MalformedHeader { offset: usize, reason: String },

    #[error("maxval {maxval} at byte {offset} exceeds 255")]
    MaxvalTooLarge { offset: usize, maxval: u32 },

    #[error("truncated pixel data at byte {offset}: expected {expected} samples, found {found}")]
    Truncated {
        offset: usize,
        expected: usize,
        found: usize,
    },

    #[error("invalid sample at byte {offset}: {reason}")]
    InvalidSample { offset: usize, reason: String },
}

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },

    #[error("line {line}: image {path}: {source}")]
    MissingImage {
        line: usize,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: image {path}: {source}")]
    BadImage {
        line: usize,
        path: PathBuf,
        #[source]
        source: PnmError,
    },
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config syntax error: {message}")]
    Syntax { message: String },

    #[error("[{section}] unknown key `{key}`")]
    UnknownKey { section: String, key: String },

    #[error("[{section}] {key}: {reason}")]
    Invalid {
        section: String,
        key: String,
        reason: String,
    },
}
