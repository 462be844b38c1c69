use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INTERNAL: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const DATA: i32 = 3;
    pub const CONFIG: i32 = 4;
    pub const DEGENERATE: i32 = 5;
    pub const IO: i32 = 6;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("duplicate record at row {row}: {message}")]
    Duplicate { row: usize, message: String },
    #[error("incomplete data: {0}")]
    Completeness(String),
    #[error("level error: {0}")]
    Level(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] longperm::Error),
    #[error(transparent)]
    Sim(#[from] longperm_sim::SimError),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        use longperm::Error as E;
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Schema(_)
            | CliError::Parse { .. }
            | CliError::Duplicate { .. }
            | CliError::Completeness(_)
            | CliError::Level(_) => exit::DATA,
            CliError::Config(_) => exit::CONFIG,
            CliError::Io { .. } => exit::IO,
            CliError::Core(e) => match e {
                E::DegenerateCovariance(_) | E::NotPsd(_) => exit::DEGENERATE,
                E::InsufficientData(_) | E::Dimension(_) => exit::DATA,
                E::Design(_) | E::Contrast(_) | E::Rank | E::Argument(_) => exit::USAGE,
            },
            // Inside a simulation every input came from the scenario file.
            CliError::Sim(longperm_sim::SimError::Core(E::DegenerateCovariance(_))) => exit::DEGENERATE,
            CliError::Sim(_) => exit::CONFIG,
        }
    }
}
