use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the set where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A distribution or family specification is malformed.
    #[error("invalid specification: {0}")]
    Construction(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Exact enumeration would exceed the state cap.
    #[error("enumeration too large: {states} states exceeds the cap of {cap}")]
    Size { states: u64, cap: u64 },

    #[error("index {index} out of range for a family of size {len}")]
    IndexOutOfRange { index: usize, len: usize },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn construction(msg: impl Into<String>) -> Self {
        Error::Construction(msg.into())
    }
}
