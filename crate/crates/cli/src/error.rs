use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("config field `{field}` out of range: {reason}")]
    Range { field: &'static str, reason: String },
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Core(#[from] t3lab::Error),

    #[error("solver did not converge after {iterations} iterations; partial artifacts kept in {}", out.display())]
    NotConverged { iterations: usize, out: PathBuf },

    #[error("no checkpoint given: pass --checkpoint or set diagnose.checkpoint")]
    MissingCheckpoint,

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
