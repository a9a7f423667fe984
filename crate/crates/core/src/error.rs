use std::path::PathBuf;

use thiserror::Error;

use crate::graph::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("graph refused: {0}")]
    InvalidGraph(Violation),

    #[error("index {index} out of range (size {size})")]
    OutOfRange { index: usize, size: usize },

    #[error("invalid parameters: {0}")]
    Domain(String),

    #[error("{what} exceeds configured limit ({value} > {limit})")]
    LimitExceeded {
        what: &'static str,
        value: u128,
        limit: u128,
    },

    #[error("left vertex {0} was already requested")]
    DuplicateRequest(usize),

    #[error("session capacity {0} reached")]
    CapacityExceeded(usize),

    #[error("no verified object after {attempts} attempts")]
    AttemptsExhausted { attempts: u64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("decoding failed: {0}")]
    Decode(String),

    #[error("unknown {kind} `{name}` (known: {known})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        known: String,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn from_json(err: serde_json::Error) -> Self {
        Error::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}
