use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("unknown curve `{0}`")]
    UnknownCurve(String),
    #[error("malformed word: {0}")]
    MalformedWord(String),
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("surface mismatch: {0} vs {1}")]
    SurfaceMismatch(String, String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("conjugation does not commute with the factor: {0}")]
    NotCommuting(String),
    #[error("data error: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;
