use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] eel_core::Error),
    #[error("fold {fold}, run {run}: {source}")]
    Cell {
        fold: usize,
        run: usize,
        #[source]
        source: eel_core::Error,
    },
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("reports cannot be paired: {0}")]
    Pairing(String),
    #[error("worker pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
    #[error("{0}")]
    Input(String),
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
