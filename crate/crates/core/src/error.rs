use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Input lies outside the region where a bound or formula holds.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("trial {trial}: {source}")]
    Trial {
        trial: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(line: usize, msg: impl Into<String>) -> Self {
        Error::Config {
            line,
            msg: msg.into(),
        }
    }

    /// True for errors that came from reading a configuration.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config { .. } => true,
            Error::Trial { source, .. } => source.is_config(),
            _ => false,
        }
    }
}
