use alloc::string::String;

/// Errors raised by the estimators, statistics and tests.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("extrinsic mean undefined: resultant length {0:e} is below threshold")]
    UndefinedMean(f64),
    #[error("degenerate bootstrap: variance {0:e} of squared resampled means")]
    DegenerateBootstrap(f64),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
