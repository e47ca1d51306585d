use std::path::{Path, PathBuf};

use brakescope_core::preprocess::SmoothingConfig;
use brakescope_core::tagger::TaggerConfig;
use serde::{Deserialize, Serialize};

use crate::failure::{Failure, ResultExt};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    #[default]
    Mock,
    Remote,
}

/// The single JSON configuration document. Every field is optional in the
/// file; command-line flags override file values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub smoothing: SmoothingConfig,
    pub tagger: TaggerConfig,
    pub provider: ProviderKind,
    pub llm_model: Option<String>,
    pub embed_model: Option<String>,
    pub concurrency: usize,
    pub logs_dir: Option<PathBuf>,
    pub work_dir: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub retrieval_queries: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            smoothing: SmoothingConfig::default(),
            tagger: TaggerConfig::default(),
            provider: ProviderKind::Mock,
            llm_model: None,
            embed_model: None,
            concurrency: 4,
            logs_dir: None,
            work_dir: None,
            annotations: None,
            retrieval_queries: None,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).input(|| format!("cannot read config {}", path.display()))?;
        serde_json::from_str(&text).input(|| format!("invalid config {}", path.display()))
    }

    pub fn validate(&self) -> Result<(), Failure> {
        self.smoothing.validate().input(|| "invalid smoothing config")?;
        self.tagger.validate().input(|| "invalid tagger config")?;
        if self.concurrency == 0 {
            return Err(Failure::input("concurrency must be at least 1"));
        }
        Ok(())
    }
}
