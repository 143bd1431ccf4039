use alloc::format;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::OptimizerKind;

/// Training mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainMode {
    /// Classification loss only.
    NoAdv,
    /// Alternating optimization against log-odds confounds.
    AltLo,
    /// Alternating optimization against LDA confounds.
    AltLda,
    /// Gradient reversal against log-odds confounds.
    GrLo,
    /// Logistic regression on stylistic features.
    Lr,
}

impl TrainMode {
    pub const ALL: [TrainMode; 5] = [
        TrainMode::NoAdv,
        TrainMode::AltLo,
        TrainMode::AltLda,
        TrainMode::GrLo,
        TrainMode::Lr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TrainMode::NoAdv => "noadv",
            TrainMode::AltLo => "alt-lo",
            TrainMode::AltLda => "alt-lda",
            TrainMode::GrLo => "gr-lo",
            TrainMode::Lr => "lr",
        }
    }

    /// Accepts both `alt-lo` and `alt_lo` spellings.
    pub fn parse(s: &str) -> Result<Self> {
        let norm = s.replace('_', "-");
        TrainMode::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown mode {s:?}")))
    }

    pub fn is_alternating(self) -> bool {
        matches!(self, TrainMode::AltLo | TrainMode::AltLda)
    }

    /// Confound source used by the adversarial modes.
    pub fn confound_mode(self) -> Option<ConfoundMode> {
        match self {
            TrainMode::AltLo | TrainMode::GrLo => Some(ConfoundMode::Lo),
            TrainMode::AltLda => Some(ConfoundMode::Lda),
            TrainMode::NoAdv | TrainMode::Lr => None,
        }
    }
}

/// How per-document confound distributions are derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConfoundMode {
    /// Log-odds word-class distributions; K equals the number of classes.
    Lo,
    /// LDA topic mixtures.
    Lda,
}

impl ConfoundMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "lo" => Ok(ConfoundMode::Lo),
            "lda" => Ok(ConfoundMode::Lda),
            _ => Err(Error::InvalidConfig(format!("unknown confound mode {s:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ConfoundMode::Lo => "lo",
            ConfoundMode::Lda => "lda",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub mode: TrainMode,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Steps per topic-training phase.
    pub adversary_steps: usize,
    /// Steps per topic-forgetting phase.
    pub forgetting_steps: usize,
    pub outer_iterations: usize,
    pub lambda: f64,
    pub patience: usize,
    /// Upper bound on epochs for early-stopped phases.
    pub max_epochs: usize,
    pub seed: u64,
    pub alpha0: f64,
    /// Train on inputs with the top-k log-odds words per class masked.
    pub mask_k: Option<usize>,
    pub optimizer: OptimizerKind,
    /// Minimum adversary entropy, as a fraction of `ln K`, for an outer
    /// iteration to be eligible for model selection.
    pub entropy_floor: f64,
    pub lda_topics: usize,
    pub lda_iterations: usize,
    /// L2 penalty of the logistic-regression baseline.
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            mode: TrainMode::NoAdv,
            batch_size: 32,
            learning_rate: 1e-3,
            adversary_steps: 500,
            forgetting_steps: 500,
            outer_iterations: 5,
            lambda: crate::model::DEFAULT_LAMBDA,
            patience: 3,
            max_epochs: 50,
            seed: 0,
            alpha0: 10.0,
            mask_k: None,
            optimizer: OptimizerKind::Adam,
            entropy_floor: 0.9,
            lda_topics: 50,
            lda_iterations: 1000,
            l2: 1e-3,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if self.mode.is_alternating()
            && (self.adversary_steps == 0
                || self.forgetting_steps == 0
                || self.outer_iterations == 0)
        {
            return bad(
                "adversary_steps, forgetting_steps and outer_iterations must be at least 1",
            );
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return bad("learning_rate must be finite and non-negative");
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return bad("lambda must be finite and non-negative");
        }
        if self.patience == 0 || self.max_epochs == 0 {
            return bad("patience and max_epochs must be at least 1");
        }
        if !(self.alpha0.is_finite() && self.alpha0 > 0.0) {
            return bad("alpha0 must be positive");
        }
        if self.lda_topics == 0 || self.lda_iterations == 0 {
            return bad("lda_topics and lda_iterations must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.entropy_floor) {
            return bad("entropy_floor must lie in [0, 1]");
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return bad("l2 must be finite and non-negative");
        }
        Ok(())
    }
}
