use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Structured failure while decoding an IDX file. Offsets are byte offsets
/// into the file.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IdxError {
    #[error("bad magic number 0x{found:08x} at offset {offset} (expected 0x{expected:08x})")]
    BadMagic { offset: usize, found: u32, expected: u32 },
    #[error("truncated IDX payload at offset {offset}: need {needed} more bytes, {available} available")]
    Truncated { offset: usize, needed: usize, available: usize },
    #[error("IDX dimensions overflow at offset {offset}")]
    DimensionOverflow { offset: usize },
    #[error("label file holds {labels} labels but image file holds {images} images")]
    CountMismatch { images: usize, labels: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("neighbor graph is disconnected into {} components (largest has {} nodes)",
        .components.len(), .components.iter().map(Vec::len).max().unwrap_or(0))]
    Disconnected { components: Vec<Vec<usize>> },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("isomap run {run} of the reference-sample pair failed: {source}")]
    ReferenceRun {
        run: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Idx(#[from] IdxError),

    #[error("CSV parse error at line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Coarse classification used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numerical,
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_) | Error::DimensionMismatch { .. } => ErrorKind::Usage,
            Error::Idx(_) | Error::Csv { .. } | Error::Io(_) => ErrorKind::Data,
            Error::Disconnected { .. } | Error::Degenerate(_) | Error::Singular(_) => {
                ErrorKind::Numerical
            }
            Error::ReferenceRun { source, .. } => source.kind(),
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        let line = e.position().map(|p| p.line()).unwrap_or(0);
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Csv { line, message: format!("{other:?}") },
        }
    }
}
