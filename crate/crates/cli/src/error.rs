use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("guard: {0}")]
    Guard(#[from] qkz_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass = 0,
    CheckFailure = 1,
    Usage = 2,
    GuardFailure = 3,
}

impl CliError {
    pub fn status(&self) -> Status {
        match self {
            CliError::Usage(_) => Status::Usage,
            CliError::Guard(qkz_core::Error::InvalidParameter(_) | qkz_core::Error::NonFinite(_)) => Status::Usage,
            CliError::Guard(_) => Status::GuardFailure,
            CliError::Io(_) => Status::Usage,
        }
    }
}
