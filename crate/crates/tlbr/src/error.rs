use std::path::PathBuf;

use tlbr_core::SolverError;

use crate::t3b::T3bError;

/// Errors of the IO layer, the applications and the command-line tool.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    T3b { path: PathBuf, source: T3bError },
    #[error("{path}: unsupported image: {detail}")]
    UnsupportedFormat { path: PathBuf, detail: String },
    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        source: image::ImageError,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("{path} is {got:?} (height, width), expected {expected:?}")]
    InconsistentDims {
        path: PathBuf,
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("person {label} has {count} images, need more than the {holdout} held out")]
    TooFewImages {
        label: String,
        count: usize,
        holdout: usize,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Tensor(#[from] tlbr_core::Error),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 1 for IO and data errors, 2 for bad
    /// configuration, 3 when the solver ran out of iterations.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::TooFewImages { .. }
            | Error::Solver(SolverError::InvalidConfig(_)) => 2,
            Error::Solver(SolverError::NotConverged(_)) => 3,
            _ => 1,
        }
    }
}
