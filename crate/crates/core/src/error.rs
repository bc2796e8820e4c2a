use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid theory: {0}")]
    InvalidTheory(String),

    #[error("operation requires a {expected} theory")]
    WrongModel { expected: &'static str },

    #[error("conditioning on an outcome of probability {probability:e} (tolerance {tolerance:e})")]
    ZeroProbability { probability: f64, tolerance: f64 },

    #[error("transformations are not coexistent: summed probability reaches {sup}")]
    NotCoexistent { sup: f64 },

    #[error("scalar {0} outside [0, 1]")]
    ScalarOutOfRange(f64),

    #[error("experiment has no transformations")]
    EmptyExperiment,

    #[error("observable effects do not sum to the unit effect (deviation {deviation:e})")]
    NotNormalized { deviation: f64 },

    #[error("state is not dynamically faithful: rank {rank} of {expected}")]
    NotFaithful { rank: usize, expected: usize },

    #[error("joint state is not preparable from the faithful state: residual {residual:e}")]
    NotPreparable { residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
