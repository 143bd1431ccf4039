//! Run settings: defaults, a flat `key = value` config file, and overrides.

use std::path::Path;

use deconfound_core::corpus::{SplitSpec, SynthSpec};
use deconfound_core::model::{ModelConfig, OptimizerKind};
use deconfound_core::training::{TrainConfig, TrainMode};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::read_text;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub train: TrainConfig,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub head_hidden: usize,
    pub max_vocab: usize,
    pub split: SplitSpec,
    pub synth: SynthSpec,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            train: TrainConfig::default(),
            embed_dim: 128,
            hidden_dim: 128,
            head_hidden: 256,
            max_vocab: 30_000,
            split: SplitSpec::default(),
            synth: SynthSpec::default(),
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| format!("{key}: {e}"))
}

impl Settings {
    /// Seeds every random stream: corpus synthesis, splitting, model
    /// initialization and training.
    pub fn set_seed(&mut self, seed: u64) {
        self.train.seed = seed;
        self.split.seed = seed;
        self.synth.seed = seed;
    }

    pub fn model_config(
        &self,
        vocab_size: usize,
        num_classes: usize,
        num_topics: usize,
    ) -> ModelConfig {
        ModelConfig {
            vocab_size,
            embed_dim: self.embed_dim,
            hidden_dim: self.hidden_dim,
            head_hidden: self.head_hidden,
            num_classes,
            num_topics,
            seed: self.train.seed,
        }
    }

    /// Applies one setting; unknown keys are an error.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let t = &mut self.train;
        let s = &mut self.synth;
        match key {
            "seed" => self.set_seed(num(key, value)?),
            "mode" => t.mode = TrainMode::parse(value).map_err(|e| e.to_string())?,
            "batch_size" => t.batch_size = num(key, value)?,
            "learning_rate" => t.learning_rate = num(key, value)?,
            "adversary_steps" => t.adversary_steps = num(key, value)?,
            "forgetting_steps" => t.forgetting_steps = num(key, value)?,
            "outer_iterations" => t.outer_iterations = num(key, value)?,
            "lambda" => t.lambda = num(key, value)?,
            "patience" => t.patience = num(key, value)?,
            "max_epochs" => t.max_epochs = num(key, value)?,
            "alpha0" => t.alpha0 = num(key, value)?,
            "mask_k" => {
                t.mask_k = if value == "none" {
                    None
                } else {
                    Some(num(key, value)?)
                }
            }
            "optimizer" => {
                t.optimizer = match value {
                    "adam" => OptimizerKind::Adam,
                    "sgd" => OptimizerKind::Sgd,
                    _ => return Err(format!("optimizer: unknown value {value:?}")),
                }
            }
            "entropy_floor" => t.entropy_floor = num(key, value)?,
            "lda_topics" => t.lda_topics = num(key, value)?,
            "lda_iterations" => t.lda_iterations = num(key, value)?,
            "l2" => t.l2 = num(key, value)?,
            "embed_dim" => self.embed_dim = num(key, value)?,
            "hidden_dim" => self.hidden_dim = num(key, value)?,
            "head_hidden" => self.head_hidden = num(key, value)?,
            "max_vocab" => self.max_vocab = num(key, value)?,
            "dev_fraction" => self.split.dev_fraction = num(key, value)?,
            "test_fraction" => self.split.test_fraction = num(key, value)?,
            "min_tokens" => self.split.min_tokens = num(key, value)?,
            "synth.num_classes" => s.num_classes = num(key, value)?,
            "synth.style_words_per_class" => s.style_words_per_class = num(key, value)?,
            "synth.topic_words_per_class" => s.topic_words_per_class = num(key, value)?,
            "synth.filler_vocab_size" => s.filler_vocab_size = num(key, value)?,
            "synth.min_length" => s.doc_length.0 = num(key, value)?,
            "synth.max_length" => s.doc_length.1 = num(key, value)?,
            "synth.style_strength" => s.style_strength = num(key, value)?,
            "synth.topic_strength_in" => s.topic_strength_in = num(key, value)?,
            "synth.topic_strength_out" => s.topic_strength_out = num(key, value)?,
            "synth.docs_per_class_per_domain" => s.docs_per_class_per_domain = num(key, value)?,
            _ => return Err(format!("unknown setting {key:?}")),
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> std::result::Result<(), String> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got {kv:?}"))?;
        self.set(k.trim(), v.trim())
    }

    /// Applies every `key = value` line of a config file. `#` starts a
    /// comment; blank lines are ignored.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = read_text(path)?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.apply_override(line)
                .map_err(|m| Error::parse(path, i + 1, m))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        self.split.validate()?;
        self.synth.validate()?;
        if self.embed_dim == 0
            || self.hidden_dim == 0
            || self.head_hidden == 0
            || self.max_vocab == 0
        {
            return Err(Error::Invalid(
                "model dimensions and max_vocab must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_and_seed() {
        let mut s = Settings::default();
        s.apply_override("seed=7").unwrap();
        assert_eq!((s.train.seed, s.split.seed, s.synth.seed), (7, 7, 7));
        s.apply_override("mode = alt_lo").unwrap();
        assert_eq!(s.train.mode, TrainMode::AltLo);
        s.apply_override("mask_k=20").unwrap();
        assert_eq!(s.train.mask_k, Some(20));
        s.apply_override("synth.max_length=40").unwrap();
        assert_eq!(s.synth.doc_length.1, 40);
        assert!(s.apply_override("nope=1").is_err());
        assert!(s.apply_override("batch_size=x").is_err());
        assert!(s.apply_override("batch_size").is_err());
    }
}
