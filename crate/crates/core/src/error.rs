use thiserror::Error;

/// Errors raised by the tensor and jet operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("two-jet construction failed (residual {residual:.3e})")]
    ConstructionFailed { residual: f64 },
    #[error("einstein extension failed (residual {residual:.3e})")]
    ExtensionFailed { residual: f64 },
    #[error("fit undefined: {0}")]
    UndefinedFit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
