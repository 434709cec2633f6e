use std::path::PathBuf;

use shadowsim_core::ShadowError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("key '{key}': {msg}")]
    Key { key: String, msg: String },

    #[error("expression '{expr}', column {column}: {msg}")]
    Expr {
        expr: String,
        column: usize,
        msg: String,
    },

    #[error(transparent)]
    Core(#[from] ShadowError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub(crate) fn key(key: &str, msg: impl Into<String>) -> Self {
        Self::Key {
            key: key.to_string(),
            msg: msg.into(),
        }
    }
}
