use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The input is outside the mathematical domain of the operation
    /// (odd degree, even tournament order, disconnected graph, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// The input is valid but larger than the operation is built to handle.
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn size(msg: impl Into<String>) -> Self {
        Error::SizeLimit(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
