use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Core(#[from] kirchhoff_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Self::Format { path: path.into(), message: message.into() }
    }

    /// Whether the failure lies in the input rather than in the numerics.
    pub fn is_usage(&self) -> bool {
        use kirchhoff_core::Error as E;
        match self {
            Self::Usage(_) | Self::Format { .. } | Self::Json { .. } | Self::Io { .. } => true,
            Self::Core(e) => matches!(
                e,
                E::InvalidGrid(_)
                    | E::Shape { .. }
                    | E::NonFinite(_)
                    | E::Dirichlet(_)
                    | E::InvalidExponent(_)
                    | E::InvalidParameter(_)
                    | E::InvalidPotential(_)
                    | E::IncompleteSpec(_)
                    | E::InvalidInput(_)
                    | E::OutOfHypothesis(_)
                    | E::DivisionByZero(_)
            ),
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_usage() {
            2
        } else {
            1
        }
    }
}
