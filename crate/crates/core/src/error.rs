use alloc::string::String;

/// Errors produced by the memory engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("frame {0} is already stored in memory")]
    Conflict(u32),
    #[error("frame {0} not found in memory")]
    NotFound(u32),
    #[error("translation direction undefined: {0}")]
    UndefinedDirection(String),
    #[error("generator failed at step {step}: {message}")]
    Generator { step: usize, message: String },
    #[error("reconstructor failed at step {step}: {message}")]
    Reconstructor { step: usize, message: String },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
