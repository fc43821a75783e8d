use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("bad spec: {0}")]
    BadSpec(String),
    #[error("cannot access {}: {source}", path.display())]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Computation(#[from] gaussgeo::Error),
    #[error("{failed} of {total} oracle checks failed")]
    OracleFailure { failed: usize, total: usize },
}

impl CliError {
    pub fn bad(msg: impl Into<String>) -> Self {
        Self::BadSpec(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::BadSpec(_) => 1,
            Self::IoFailure { .. } | Self::Computation(_) => 2,
            Self::OracleFailure { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
