use std::io;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Caller supplied arguments that violate a precondition.
    #[error("{0}")]
    Input(String),
    /// Bytes on disk or on the wire do not match the expected layout.
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    Numeric(String),
    /// Every candidate neighbour has zero scaled similarity.
    #[error("{0}")]
    Degenerate(String),
    #[error("index {index} out of range (len {len})")]
    Index { index: usize, len: usize },
    #[error("step {step}: {source}")]
    AtStep { step: usize, source: Box<Error> },
    #[error("{0}")]
    Io(#[from] io::Error),
}

impl Error {
    /// Short machine-readable category, used for `error:<category>:` prefixes.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Input(_) => "input",
            Error::Format(_) => "format",
            Error::Numeric(_) => "numeric",
            Error::Degenerate(_) => "degenerate",
            Error::Index { .. } => "index",
            Error::AtStep { source, .. } => source.category(),
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
