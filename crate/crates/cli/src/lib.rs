//! Experiment driver behind the `t3lab` binary.
//!
//! A run reads an [`ExperimentConfig`], validates it in full, executes one
//! [`Command`] and writes its artifacts plus a `manifest.toml` into the output
//! directory.

// NaN-rejecting range checks read better negated
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
mod error;
mod manifest;
mod run;

pub use config::ExperimentConfig;
pub use error::{ConfigError, RunError};
pub use manifest::{config_hash, Artifact, Manifest};
pub use run::{run, Command};
