use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::RunError;

/// SHA-256 of the normalised config text, lowercase hex.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    Sha256::digest(cfg.to_toml().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Artifact {
    pub path: String,
    pub kind: String,
    pub config_sha256: String,
    /// Array or column names, in file order.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fields: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunInfo {
    pub subcommand: String,
    pub status: String,
    pub seed: u64,
    pub config_sha256: String,
    pub t3lab_version: String,
    pub cli_version: String,
    pub threads: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub run: RunInfo,
    pub summary: toml::Table,
    pub artifacts: Vec<Artifact>,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn new(subcommand: &str, cfg: &ExperimentConfig) -> Self {
        Self {
            run: RunInfo {
                subcommand: subcommand.into(),
                status: "ok".into(),
                seed: cfg.seed,
                config_sha256: config_hash(cfg),
                t3lab_version: t3lab::VERSION.into(),
                cli_version: env!("CARGO_PKG_VERSION").into(),
                threads: rayon::current_num_threads(),
            },
            summary: toml::Table::new(),
            artifacts: Vec::new(),
            config: cfg.clone(),
        }
    }

    pub fn add(&mut self, path: &str, kind: &str, fields: impl IntoIterator<Item = impl Into<String>>) {
        self.artifacts.push(Artifact {
            path: path.into(),
            kind: kind.into(),
            config_sha256: self.run.config_sha256.clone(),
            fields: fields.into_iter().map(Into::into).collect(),
        });
    }

    pub fn note(&mut self, key: &str, value: impl Into<toml::Value>) {
        self.summary.insert(key.into(), value.into());
    }

    pub fn write(&self, dir: &Path) -> Result<(), RunError> {
        let path = dir.join("manifest.toml");
        let text = toml::to_string(self).expect("manifest is always serialisable");
        std::fs::write(&path, text).map_err(|source| RunError::Io { path, source })
    }
}
