use thiserror::Error;

/// Errors produced by the encounter model and its tooling.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),

    /// The airplane already sits on the point it is asked to steer toward.
    #[error("target reached")]
    TargetReached,

    #[error("safety already violated (h = {h:.6e})")]
    SafetyViolated { h: f64 },

    #[error("unstable heading gain: k*dt = {product} must be below 2")]
    UnstableGain { product: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("precondition violated: {0}")]
    Precondition(&'static str),

    #[error("internal error: {0}")]
    Internal(&'static str),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
