use std::path::PathBuf;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    /// Reserved for command-line usage errors (clap's default).
    pub const USAGE: i32 = 2;
    pub const INPUT: i32 = 3;
    pub const CONFIG: i32 = 4;
    pub const DIVERGED: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {detail}")]
    Parse { path: PathBuf, detail: String },

    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } => exit::INPUT,
            CliError::Config(_) => exit::CONFIG,
            CliError::Numerical(_) => exit::DIVERGED,
            CliError::Io { .. } => exit::IO,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn parse(path: impl Into<PathBuf>, detail: impl Into<String>) -> Self {
        CliError::Parse { path: path.into(), detail: detail.into() }
    }
}

impl From<scaleloss_core::Error> for CliError {
    fn from(e: scaleloss_core::Error) -> Self {
        use scaleloss_core::Error as E;
        match e {
            E::Diverged { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
