use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown function `{name}` at byte {offset} (supported: sin, cos, exp)")]
    UnknownFunction { name: String, offset: usize },

    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("wavefunctions live on different grids or times")]
    GridMismatch,

    #[error("cannot normalize a wavefunction with zero norm")]
    ZeroNorm,

    #[error("gauge function `{0}` is not separable as f(x) + g(t)")]
    NotSeparable(String),

    #[error("potential pairs are not gauge equivalent: {0}")]
    NotGaugeEquivalent(String),

    #[error("no antiderivative in t for `{0}`")]
    NonIntegrable(String),

    #[error("linear solve failed: zero pivot at row {row}")]
    SolveFailure { row: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
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
