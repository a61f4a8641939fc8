use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("oracle has no subgradient selection")]
    MissingSubgradient,
    #[error("non-finite input")]
    NonFiniteInput,
    #[error("objective returned a non-finite value")]
    NonFiniteObjective,
    #[error("oracle has no known minimizer or minimal value")]
    MissingMinimizer,
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
    #[error("property requires gamma > 0")]
    GammaZeroForGrowth,
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("certificate centers differ")]
    CenterMismatch,
    #[error("matrix is not of full column rank")]
    RankDeficient,
    #[error("center is not in the range of the matrix (residual {0:e})")]
    RangeViolation(f64),
    #[error("argument {0} is outside the domain")]
    OutOfDomain(f64),
    #[error("objective does not declare a smoothable atom structure")]
    UnsupportedAtom,
    #[error("trace too short: {0}")]
    InsufficientTrace(String),
    #[error("a local radius is required for 1 < p < 2 with gamma > 0")]
    RadiusRequired,
    #[error("region is empty")]
    EmptyRegion,
    #[error("data matrix does not have full row rank")]
    RankDeficientData,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown zoo entry `{0}`")]
    UnknownEntry(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
