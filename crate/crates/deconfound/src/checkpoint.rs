//! Self-describing JSON checkpoints.

use std::path::{Path, PathBuf};

use deconfound_core::confounds::LogOddsTable;
use deconfound_core::corpus::{LabelSet, Vocabulary};
use deconfound_core::evaluate::{NeuralPredictor, Predictor};
use deconfound_core::model::Network;
use deconfound_core::training::{LinearModel, TrainConfig, TrainMode, TrainState};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_text, write_text};

pub const CHECKPOINT_FORMAT: &str = "deconfound-checkpoint/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TrainedModel {
    /// Encoder, classifier, adversary pool, optimizer moments, phase
    /// counters and random streams.
    Neural(Box<TrainState>),
    Linear(Box<LinearModel>),
}

/// Test sets recorded at training time, used by `eval` when no test paths
/// are given.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DataPaths {
    pub train: Option<PathBuf>,
    pub dev: Option<PathBuf>,
    pub test_in: Option<PathBuf>,
    pub test_out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub mode: TrainMode,
    pub config: TrainConfig,
    pub classes: LabelSet,
    pub vocab: Vocabulary,
    /// Training-set log-odds, used for masked evaluation.
    pub log_odds: Option<LogOddsTable>,
    pub model: TrainedModel,
    #[serde(default)]
    pub data: DataPaths,
}

impl Checkpoint {
    pub fn new(
        mode: TrainMode,
        config: TrainConfig,
        classes: LabelSet,
        vocab: Vocabulary,
        log_odds: Option<LogOddsTable>,
        model: TrainedModel,
    ) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            mode,
            config,
            classes,
            vocab,
            log_odds,
            model,
            data: DataPaths::default(),
        }
    }

    pub fn network(&self) -> Option<&Network> {
        match &self.model {
            TrainedModel::Neural(s) => Some(&s.network),
            TrainedModel::Linear(_) => None,
        }
    }

    pub fn state(&self) -> Option<&TrainState> {
        match &self.model {
            TrainedModel::Neural(s) => Some(s),
            TrainedModel::Linear(_) => None,
        }
    }

    pub fn predictor(&self) -> Box<dyn Predictor + '_> {
        match &self.model {
            TrainedModel::Neural(s) => Box::new(NeuralPredictor {
                network: &s.network,
                vocab: &self.vocab,
                classes: &self.classes,
            }),
            TrainedModel::Linear(m) => Box::new(m.as_ref().clone()),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Invalid(e.to_string()))
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        match value.get("format").and_then(|f| f.as_str()) {
            Some(CHECKPOINT_FORMAT) => {}
            Some(other) => return Err(format!("unsupported checkpoint format {other:?}")),
            None => return Err("missing checkpoint format tag".into()),
        }
        serde_json::from_value(value).map_err(|e| e.to_string())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_json()?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Checkpoint::from_json(&read_text(path)?).map_err(|m| Error::parse(path, 1, m))
    }
}
