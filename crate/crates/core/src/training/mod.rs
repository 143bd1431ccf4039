//! Pretraining, alternating topic training / topic forgetting against a
//! growing adversary pool, gradient-reversal training and the stylistic
//! logistic-regression baseline.

mod baseline;
mod batch;
mod config;
mod neural;
mod state;

pub use baseline::{
    function_words, mean_sentence_length, train_lr_baseline, train_lr_with_words, FeatureSpace,
    LinearModel,
};
pub(crate) use batch::map_docs;
pub use batch::BatchSampler;
pub use config::{ConfoundMode, TrainConfig, TrainMode};
pub use neural::{
    accuracy, adversary_entropy, build_confounds, grl_step, pretrain, run_alternating,
    topic_forgetting_phase, topic_training_phase, train_grl, Confounds,
};
pub use state::{IterationSummary, LogRecord, NoopObserver, Phase, TrainObserver, TrainState};
