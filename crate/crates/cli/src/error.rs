use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error(transparent)]
    Core(#[from] coint_alasso::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        if source.kind() == std::io::ErrorKind::NotFound {
            return CliError::MissingInput(path.display().to_string());
        }
        CliError::Io {
            context: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use coint_alasso::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::MissingInput(_) => 4,
            CliError::Core(e) => match e.root() {
                E::Config(_) | E::Usage(_) | E::Shape(_) | E::Length { .. } => 2,
                E::UnsupportedRegime(_) => 3,
                _ => 1,
            },
            CliError::Io { .. } | CliError::Failed(_) => 1,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Failed(format!("csv: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
