use std::path::PathBuf;

use palmfact_core::Error as CoreError;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
/// Output could not be written.
pub const EXIT_IO: i32 = 1;
/// Bad flags, unreadable or malformed inputs, inconsistent shapes.
pub const EXIT_CONFIG: i32 = 2;
/// The solver aborted or some experiment trials failed.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },

    #[error("{}: {source}", path.display())]
    Input { path: PathBuf, source: CoreError },

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("writing {}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, CliError>;

fn core_exit_code(e: &CoreError) -> i32 {
    match e {
        CoreError::DegenerateProjection
        | CoreError::DegenerateScale
        | CoreError::NonFinite { .. }
        | CoreError::RankRepair(_) => EXIT_NUMERICAL,
        CoreError::DimensionMismatch(_)
        | CoreError::InvalidMatrix(_)
        | CoreError::InvalidArgument(_)
        | CoreError::Parse { .. } => EXIT_CONFIG,
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Read { .. } | CliError::Json { .. } => EXIT_CONFIG,
            CliError::Input { source, .. } | CliError::Core(source) => core_exit_code(source),
            CliError::Write { .. } => EXIT_IO,
        }
    }
}
