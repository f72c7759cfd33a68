use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the solver and its diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    #[error("grid mismatch: expected n = {expected}, found n = {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("forcing index ({i}, {j}) is not representable on an n = {n} grid")]
    UnrepresentableMode { i: usize, j: usize, n: usize },

    #[error("radius {r} is below one grid cell (1/{n})")]
    RadiusUnresolved { r: f64, n: usize },

    #[error("numerical instability at step {step} (t = {t})")]
    Unstable { step: usize, t: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
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
