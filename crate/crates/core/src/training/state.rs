use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::batch::BatchSampler;
use super::config::TrainConfig;
use crate::model::{AdversaryPool, HeadParams, Network, Optimizer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Pretrain,
    TopicTrain,
    TopicForget,
    /// Joint gradient-reversal training.
    Reversal,
    /// Logistic-regression fitting.
    Linear,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Pretrain => "pretrain",
            Phase::TopicTrain => "topic_train",
            Phase::TopicForget => "topic_forget",
            Phase::Reversal => "reversal",
            Phase::Linear => "linear",
        }
    }
}

/// One training-log line. `combined_loss` is always
/// `classification_loss + adversary_loss`; dev metrics are present only on
/// epoch and iteration summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub step: u64,
    pub phase: Phase,
    pub iteration: usize,
    pub classification_loss: f64,
    pub adversary_loss: f64,
    pub combined_loss: f64,
    pub dev_accuracy: Option<f64>,
    pub adversary_entropy: Option<f64>,
}

/// Dev metrics recorded after each outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationSummary {
    pub iteration: usize,
    pub dev_accuracy: f64,
    pub adversary_entropy: f64,
}

/// Receives log records and phase-boundary notifications.
pub trait TrainObserver {
    fn record(&mut self, _record: &LogRecord) {}
    fn phase_end(&mut self, _state: &TrainState) {}
}

/// Observer that discards everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoopObserver;

impl TrainObserver for NoopObserver {}

impl TrainObserver for Vec<LogRecord> {
    fn record(&mut self, record: &LogRecord) {
        self.push(record.clone());
    }
}

/// Everything needed to resume or inspect a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainState {
    pub config: TrainConfig,
    pub network: Network,
    pub pool: AdversaryPool,
    pub optimizer: Optimizer,
    /// Only used by gradient-reversal training.
    pub adversary_optimizer: Option<Optimizer>,
    pub phase: Phase,
    /// Completed outer iterations.
    pub iteration: usize,
    pub step: u64,
    pub epochs: usize,
    pub best_dev: f64,
    pub epochs_without_improvement: usize,
    pub history: Vec<IterationSummary>,
    /// Outer iteration whose parameters were kept, if any.
    pub selected_iteration: Option<usize>,
    pub sampler: BatchSampler,
}

impl TrainState {
    pub fn new(network: Network, config: &TrainConfig, num_docs: usize) -> Self {
        TrainState {
            config: config.clone(),
            optimizer: Optimizer::new(config.optimizer, config.learning_rate),
            adversary_optimizer: None,
            pool: AdversaryPool::new(config.seed),
            network,
            phase: Phase::Pretrain,
            iteration: 0,
            step: 0,
            epochs: 0,
            best_dev: -1.0,
            epochs_without_improvement: 0,
            history: Vec::new(),
            selected_iteration: None,
            sampler: BatchSampler::new(num_docs, config.seed),
        }
    }

    /// The single adversary of gradient-reversal training, or the latest
    /// pool member.
    pub fn latest_adversary(&self) -> Option<&HeadParams> {
        self.pool.heads().last()
    }
}
