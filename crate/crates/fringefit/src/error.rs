//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by model construction, estimation, and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A shifter grid needs at least two positions.
    #[error("shifter grid needs at least 2 positions, got {0}")]
    InvalidGrid(usize),

    /// Physically inconsistent model parameters.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Log-likelihood gradient does not exist at the requested point.
    #[error("gradient undefined: zero mean intensity facing a positive count")]
    UndefinedGradient,

    /// An operation got an empty input list.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// A window width outside (0, 2*pi].
    #[error("window width {0} outside (0, 2*pi]")]
    InvalidWindow(f64),

    /// Curves over different window grids cannot be aggregated.
    #[error("window grids differ between curves")]
    WindowMismatch,

    /// Malformed data file (CSV).
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// Structurally valid input that is inconsistent as data.
    #[error("data mismatch: {0}")]
    DataMismatch(String),

    /// Bad configuration key or value.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
