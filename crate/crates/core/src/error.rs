use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// Variants fall in two families: validation problems (bad inputs, bad
/// files, violated physical constraints) and numeric failures (a method
/// could not reach its own tolerance). [`Error::is_validation`] tells them
/// apart, which the CLI uses for its exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("singular denominator (|det| = {0:e})")]
    SingularDenominator(f64),

    #[error("matrix is not unitary (deviation {0:e})")]
    NonUnitary(f64),

    #[error("invalid noise parameters: {0}")]
    InvalidNoise(String),

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("step budget exceeded: {0}")]
    StepBudget(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("insufficient tail: {found} samples at or after t* = {t_star}, need {needed}")]
    InsufficientTail {
        t_star: f64,
        found: usize,
        needed: usize,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("singular calibration matrix (det = {0:e})")]
    SingularCalibration(f64),

    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("physical constraint violated at `{path}`: {message}")]
    PhysicalConstraint { path: String, message: String },

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("t_a = {t_a}, mode = {mode}: {source}")]
    Cell {
        t_a: f64,
        mode: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for input/validation failures, false for numeric failures.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Domain(_)
            | Error::InvalidNoise(_)
            | Error::Precondition(_)
            | Error::DegenerateData(_)
            | Error::Schema { .. }
            | Error::PhysicalConstraint { .. }
            | Error::OutOfRange(_)
            | Error::NonUnitary(_)
            | Error::SingularCalibration(_)
            | Error::Io { .. } => true,
            Error::Cell { source, .. } => source.is_validation(),
            _ => false,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
