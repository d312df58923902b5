use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Problems with the configuration; the CLI exits with status 1.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("invalid value for `{key}`: {message}")]
    Range { key: &'static str, message: String },
    #[error("parallelism override {0} is set; the benchmark must run single-threaded")]
    ParallelismOverride(String),
}

/// Failures while running; the CLI exits with status 2.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("output directory {path} is not writable: {source}")]
    Output { path: PathBuf, source: io::Error },
    #[error("writing {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("trial {trial}: {source}")]
    Inference { trial: usize, source: pmpnbp::Error },
    #[error(transparent)]
    Config(#[from] ConfigError),
}
