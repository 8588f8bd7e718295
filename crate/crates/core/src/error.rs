use thiserror::Error;

/// Failures reported by the laboratory.
///
/// Domain errors mean the request itself is invalid; numerical failures mean
/// a well-posed request could not be carried out to the requested accuracy.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("word length {len} exceeds the configured bound {bound}")]
    LengthBound { len: usize, bound: usize },
    #[error("argument {value} outside the validity range of {what}")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("step size collapsed to {0:e}")]
    StepTooSmall(f64),
    #[error("construction check failed: {0}")]
    Construction(String),
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence(_)
                | Error::NonFinite(_)
                | Error::StepTooSmall(_)
                | Error::Construction(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
