use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("structural integrity violated: {0}")]
    Structure(String),
    #[error("not a chain map: {0}")]
    NotChainMap(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("overflow of cap `{cap}`: {detail}")]
    Overflow { cap: String, detail: String },
    #[error("not a Maurer-Cartan element, residual {0}")]
    NotMaurerCartan(String),
    #[error("hypothesis failed: {0}")]
    Hypothesis(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub fn overflow(cap: &str, detail: impl Into<String>) -> Error {
    Error::Overflow { cap: cap.to_string(), detail: detail.into() }
}
