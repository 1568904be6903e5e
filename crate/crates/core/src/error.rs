use alloc::string::String;

/// Failures reported by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// The grid or partition cannot represent the requested frequency content.
    #[error("resolution error: {reason}")]
    Resolution { reason: String, required_n: Option<usize> },
    #[error("domain truncation: {0}")]
    DomainTruncation(String),
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("blow-up detected at t = {time}: {reason}")]
    Blowup { time: f64, reason: String },
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::error::Error::InvalidParameter(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;
