//! JSON configuration file. Every field is optional; command-line flags
//! override whatever the file sets.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::failure::{CmdResult, Failure};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub datasets: Vec<PathBuf>,
    pub outlier_columns: Option<Vec<String>>,
    pub outlier_k: Option<f64>,
    pub remove_outliers: Option<bool>,
    pub split_ratio: Option<f64>,
    pub seed: Option<u64>,
    pub algo: Option<String>,
    pub profile: Option<String>,
    pub transform: Option<String>,
    pub channel_frequency: Option<bool>,
    pub hyperparameters: Hyperparameters,
    pub model_out: Option<PathBuf>,
    pub models: Vec<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub topics: Option<PathBuf>,
    pub beta: Option<f64>,
    pub server: ServerSection,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparameters {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: Option<usize>,
    pub min_gain: Option<f64>,
    pub n_trees: Option<usize>,
    pub feature_fraction: Option<f64>,
    pub bootstrap: Option<bool>,
    pub n_rounds: Option<usize>,
    pub eta: Option<f64>,
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerSection {
    pub host: Option<String>,
    pub port: Option<u16>,
    pub max_concurrency: Option<usize>,
    pub max_topics: Option<usize>,
    /// Bearer token required on every endpoint except health.
    pub token: Option<String>,
    /// Enables `POST /api/admin/reload-topics` behind this bearer token.
    pub admin_token: Option<String>,
    pub cors_origins: Option<Vec<String>>,
}

impl Config {
    /// Reads `path`. Relative paths inside the file are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> CmdResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
        let mut cfg: Config = serde_json::from_str(&text)
            .map_err(|e| Failure::usage(format!("{}: invalid config: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.datasets.iter_mut().for_each(fix);
        cfg.models.iter_mut().for_each(fix);
        cfg.model_out.iter_mut().for_each(fix);
        cfg.embeddings.iter_mut().for_each(fix);
        cfg.topics.iter_mut().for_each(fix);
        Ok(cfg)
    }
}

/// Fails with a usage error unless `path` exists.
pub fn require_exists(path: &Path) -> CmdResult<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Failure::usage(format!("{}: no such file", path.display())))
    }
}
