use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("artifact {path}: {detail}")]
    Artifact { path: PathBuf, detail: String },
    #[error("artifact {path}: checksum mismatch (stored {stored}, computed {computed})")]
    Checksum {
        path: PathBuf,
        stored: String,
        computed: String,
    },
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    /// 1 for numerical failures, 2 for usage, config and input errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical(_) => 1,
            _ => 2,
        }
    }

    pub fn numerical(e: impl std::fmt::Display) -> Self {
        CliError::Numerical(e.to_string())
    }
}
