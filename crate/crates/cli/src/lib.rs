//! HTTP API and artifact loading shared by the `factcheck` binary.

pub mod api;

use std::path::PathBuf;

use anyhow::Context;
use factcheck_core::bundled;
use factcheck_core::pipeline::{ConfigFile, Pipeline};

/// Where the pipeline's artifacts come from. Explicit paths override the
/// config file, which overrides the bundled demo data.
#[derive(Debug, Clone, Default)]
pub struct ArtifactArgs {
    /// Config file; `FAKTA_CONFIG` is consulted when unset.
    pub config: Option<PathBuf>,
    pub index_dir: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub registry: Option<PathBuf>,
}

impl ArtifactArgs {
    pub fn config_file(&self) -> anyhow::Result<ConfigFile> {
        let mut cfg = match &self.config {
            Some(p) => ConfigFile::load(p).with_context(|| format!("loading config {}", p.display()))?,
            None => ConfigFile::from_env()?.unwrap_or_default(),
        };
        if let Some(p) = &self.index_dir {
            cfg.artifacts.index_dir = Some(p.clone());
        }
        if let Some(p) = &self.model {
            cfg.artifacts.stance_model = Some(p.clone());
        }
        if let Some(p) = &self.registry {
            cfg.artifacts.registry = Some(p.clone());
        }
        Ok(cfg)
    }

    pub fn load(&self) -> anyhow::Result<Pipeline> {
        let cfg = self.config_file()?;
        Ok(bundled::pipeline_from_config(&cfg)?)
    }
}
