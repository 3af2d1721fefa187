use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScreenError {
    /// Invalid parameters or incompatible options.
    #[error("configuration error: {0}")]
    Config(String),

    /// Input outside the domain of an estimator (too few rows, NaN, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A factorisation or solve failed.
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("column `{label}` (position {index}) is constant; Pearson correlation is undefined")]
    ConstantColumn { index: usize, label: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("replicate {replicate} (seed {seed}) failed: {source}")]
    Replicate {
        replicate: usize,
        seed: u64,
        #[source]
        source: Box<ScreenError>,
    },
}

impl ScreenError {
    pub fn is_config(&self) -> bool {
        match self {
            ScreenError::Config(_) => true,
            ScreenError::Replicate { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, ScreenError>;
