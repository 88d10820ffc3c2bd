use alloc::string::String;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument is outside the domain the routine is defined on.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A numerical precondition failed at run time (e.g. a matrix that
    /// should be positive definite is not).
    #[error("numerical domain error: {0}")]
    NumericalDomain(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::Error::InvalidParameter(alloc::format!($($arg)*))
    };
}

macro_rules! domain {
    ($($arg:tt)*) => {
        $crate::Error::NumericalDomain(alloc::format!($($arg)*))
    };
}

pub(crate) use domain;
pub(crate) use invalid;
