use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Shapes, variants or arguments that do not fit together.
    InvalidArgument(String),
    /// Training produced a non-finite loss.
    NumericalAbort { epoch: usize, loss: f64, param_norm: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::NumericalAbort { epoch, loss, param_norm } => {
                write!(f, "non-finite loss {loss} at epoch {epoch} (parameter 2-norm {param_norm})")
            }
        }
    }
}

impl core::error::Error for Error {}
