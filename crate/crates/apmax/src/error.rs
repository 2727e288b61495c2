use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{what} = {got} out of range [1, {max}]")]
    OutOfRange {
        what: &'static str,
        got: usize,
        max: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot shrink a word from length {from} to {to}")]
    ShrinkingExtend { from: usize, to: usize },

    #[error("{what} = {got} exceeds the brute-force cap {cap}")]
    CapExceeded {
        what: &'static str,
        got: usize,
        cap: usize,
    },

    #[error("threshold offset x = {x} must lie below eps*ln(n) = {limit}")]
    ThresholdAboveTruncation { x: f64, limit: f64 },

    #[error("empty sample set")]
    EmptySamples,

    #[error("invalid config: {0}")]
    Config(String),

    #[error("parse error at line {line}, field `{field}`: {msg}")]
    Parse {
        line: usize,
        field: String,
        msg: String,
    },

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
