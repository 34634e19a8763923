use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad parameters or shapes supplied by the caller.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// The input is valid but the protocol cannot measure it, e.g. a field
    /// whose zero-momentum amplitude vanishes.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The propagation kernel is undersampled on the requested grid.
    #[error("sampling violation: {0}")]
    Nyquist(String),

    #[error("paraxial condition violated: {0}")]
    Paraxial(String),

    /// Malformed WFGRID, CSV, PGM or config payload.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invalid(_) => 2,
            Error::Degenerate(_) | Error::Nyquist(_) | Error::Paraxial(_) => 3,
            Error::Format(_) | Error::Io(_) => 4,
        }
    }
}
