use thiserror::Error;

/// Errors raised by the dominance-testing toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument {value} outside the domain of {func}")]
    Domain { func: &'static str, value: f64 },

    #[error("sample must contain at least one observation")]
    EmptySample,

    #[error("sample value {value} at position {index} is not a finite non-negative number")]
    InvalidObservation { index: usize, value: f64 },

    #[error("matched-pairs scheme requires samples of equal length (got {n} and {m})")]
    UnpairedSamples { n: usize, m: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
