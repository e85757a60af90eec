use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("parity error: {0}")]
    Parity(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("truncation overflow: {0}; increase the z window or lower the order")]
    TruncationOverflow(String),
}

pub type Result<T> = std::result::Result<T, EngineError>;
