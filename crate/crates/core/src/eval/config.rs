//! Experiment configuration file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::augment::AugmentConfig;
use crate::encode::EncodingSpec;
use crate::error::{Error, Result};
use crate::eval::aggregate::{AggregationMode, SdKind};
use crate::impute::ImputeConfig;

/// How sessions are trained and scored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainerEndpoint {
    /// Built-in nearest-centroid probe over image pixels.
    NearestCentroid {
        #[serde(default)]
        half_width: Option<usize>,
    },
    /// External trainer driven through two commands. Arguments may contain
    /// `{session}`, `{images}`, `{ckpt}`, `{test_images}` and `{out}`.
    Command { train: Vec<String>, predict: Vec<String> },
}

impl Default for TrainerEndpoint {
    fn default() -> Self {
        TrainerEndpoint::NearestCentroid { half_width: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset_manifest: PathBuf,
    #[serde(default = "default_strategy")]
    pub strategy: String,
    /// `null` disables imputation.
    #[serde(default = "default_impute")]
    pub impute: Option<ImputeConfig>,
    #[serde(default)]
    pub augment: AugmentConfig,
    #[serde(default)]
    pub encode: EncodingSpec,
    #[serde(default)]
    pub split_mode: AggregationMode,
    #[serde(default)]
    pub sd: SdKind,
    #[serde(default)]
    pub trainer: TrainerEndpoint,
    #[serde(default)]
    pub bench: BenchSettings,
}

/// External stages timed by `bench` alongside the built-in ones.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchSettings {
    #[serde(default)]
    pub commands: Vec<CommandStage>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandStage {
    pub name: String,
    /// `{video}` expands to the benchmarked sequence path.
    pub argv: Vec<String>,
}

fn default_strategy() -> String {
    "asl-2nd".into()
}

fn default_impute() -> Option<ImputeConfig> {
    Some(ImputeConfig::default())
}

impl ExperimentConfig {
    pub fn new(dataset_manifest: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            dataset_manifest: dataset_manifest.into(),
            strategy: default_strategy(),
            impute: default_impute(),
            augment: AugmentConfig::default(),
            encode: EncodingSpec::default(),
            split_mode: AggregationMode::default(),
            sd: SdKind::default(),
            trainer: TrainerEndpoint::default(),
            bench: BenchSettings::default(),
        }
    }

    /// Loads a config; a relative dataset path resolves against the config file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        if cfg.dataset_manifest.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.dataset_manifest = dir.join(&cfg.dataset_manifest);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(i) = &self.impute {
            i.validate()?;
        }
        self.augment.validate()?;
        if let TrainerEndpoint::Command { train, predict } = &self.trainer {
            if train.is_empty() || predict.is_empty() {
                return Err(Error::Config("trainer commands must not be empty".into()));
            }
        }
        Ok(())
    }
}
