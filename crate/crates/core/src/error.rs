use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid box ({x}, {y}, {w}, {h}): coordinates must be finite and width/height positive")]
    InvalidBox { x: f64, y: f64, w: f64, h: f64 },

    #[error("invalid batch: {0}")]
    InvalidBatch(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range for batch of {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{} record(s) reference unknown ids: {}", .0.len(), .0.join("; "))]
    UnknownReferences(Vec<String>),

    #[error("optimization diverged at step {step}: loss, gradient or box became non-finite")]
    Diverged { step: usize },
}
