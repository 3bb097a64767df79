use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpinError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("outside domain: {0}")]
    Domain(String),
    #[error("singular input: {0}")]
    Singular(String),
}
