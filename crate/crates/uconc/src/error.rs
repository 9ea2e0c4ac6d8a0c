use std::path::PathBuf;

/// Everything the command layer can fail with, mapped onto exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] uconc_core::Error),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Format { path: PathBuf, line: usize, message: String },
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub const EXIT_PRECONDITION: u8 = 2;
pub const EXIT_INVARIANT: u8 = 3;
pub const EXIT_RESOURCE_CAP: u8 = 4;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use uconc_core::Error as E;
        match self {
            Self::Core(E::ResourceCap(_)) => EXIT_RESOURCE_CAP,
            Self::Core(E::Invariant(_)) | Self::CheckFailed(_) => EXIT_INVARIANT,
            Self::Core(_) | Self::Argument(_) | Self::Format { .. } => EXIT_PRECONDITION,
            Self::Io { .. } | Self::Json(_) | Self::Csv(_) => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
