use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SandlabError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Search space, window or precision budget exceeded.
    #[error("size limit exceeded: {0}")]
    Size(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("io: {0}")]
    Io(String),
}

impl SandlabError {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            SandlabError::InvalidArgument(_) | SandlabError::Precondition(_) => 2,
            SandlabError::Size(_) => 3,
            SandlabError::Internal(_) | SandlabError::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for SandlabError {
    fn from(e: std::io::Error) -> Self {
        SandlabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, SandlabError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(SandlabError::InvalidArgument(msg.into()))
}

pub(crate) fn too_big<T>(msg: impl Into<String>) -> Result<T> {
    Err(SandlabError::Size(msg.into()))
}
