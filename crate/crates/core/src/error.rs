use thiserror::Error;

#[derive(Debug, Error)]
pub enum DhnError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("neuron index {index} out of range for a network with {len} neurons")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("degenerate graph: {0}")]
    DegenerateGraph(String),

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("instance too large for exhaustive enumeration: {0}")]
    TooLarge(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl DhnError {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        DhnError::Shape(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        DhnError::InvalidArgument(msg.into())
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            DhnError::Usage(_) | DhnError::InvalidArgument(_) => 2,
            DhnError::Parse { .. } | DhnError::Io(_) | DhnError::Json(_) => 3,
            DhnError::Shape(_)
            | DhnError::IndexOutOfRange { .. }
            | DhnError::DegenerateGraph(_)
            | DhnError::DegenerateSpectrum(_)
            | DhnError::TooLarge(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, DhnError>;
