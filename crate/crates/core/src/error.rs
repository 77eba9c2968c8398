use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
///
/// The variants fall into three families that the CLI maps to distinct exit
/// codes: contract/shape violations, data problems (parse, missing classes,
/// I/O) and numerical failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("data error: {0}")]
    Data(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("training diverged at epoch {epoch}, batch {batch}: objective is {value}")]
    Diverged { epoch: usize, batch: usize, value: f64 },

    #[error("sweep cell {axis} = {value}, seed {seed}: {source}")]
    Cell {
        axis: String,
        value: f64,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the numbers themselves rather than inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Cell { source, .. } => source.is_numerical(),
            _ => matches!(self, Error::NonFinite(_) | Error::Diverged { .. }),
        }
    }

    /// True for failures caused by input files or their contents.
    pub fn is_data(&self) -> bool {
        match self {
            Error::Cell { source, .. } => source.is_data(),
            _ => matches!(self, Error::Parse { .. } | Error::Data(_) | Error::Io { .. }),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
