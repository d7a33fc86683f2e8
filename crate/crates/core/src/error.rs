use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong inside the laboratory.
///
/// The CLI maps [`Error::Io`] to exit status 2 and every other variant to 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid discriminant {value}: {reason}")]
    InvalidDiscriminant { value: i128, reason: &'static str },

    #[error("form ({a}, {b}, {c}) is not reduced for discriminant {d}")]
    NotReduced { a: i64, b: i64, c: i64, d: u64 },

    #[error("geodesic_counts: trace table covers t <= {have}, but x = {x} needs t <= {need}")]
    InsufficientTable { have: u64, need: u64, x: f64 },

    #[error("logarithmic integral has a pole at x = 1")]
    Pole,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{module}: requested {what} = {requested} exceeds coverage {coverage}")]
    Coverage {
        module: &'static str,
        what: &'static str,
        requested: f64,
        coverage: f64,
    },

    #[error("truncation T = {t} outside the validity window [1, {cap}] at x = {x}")]
    CapViolation { t: f64, cap: f64, x: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("cache file: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}
