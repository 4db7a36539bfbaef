use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    SpecFile { path: PathBuf, message: String },

    #[error(transparent)]
    Library(#[from] transport_alpha::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use transport_alpha::Error as L;
        match self {
            CliError::Library(L::Numerical { .. } | L::Estimation(_)) => 3,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        use transport_alpha::Error as L;
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } | CliError::Write { .. } => "io",
            CliError::SpecFile { .. } | CliError::Library(L::Spec(_)) => "spec",
            CliError::Library(L::Domain(_)) => "domain",
            CliError::Library(L::Numerical { .. }) => "numerical",
            CliError::Library(L::Estimation(_)) => "estimation",
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
