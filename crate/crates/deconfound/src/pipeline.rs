//! Training-mode dispatch shared by `train` and `bench`.

use deconfound_core::confounds::{compute_log_odds, LogOddsTable};
use deconfound_core::corpus::{mask_top_k, Document, EncodedDocument, LabelSet, Vocabulary};
use deconfound_core::training::{
    build_confounds, pretrain, run_alternating, train_grl, train_lr_baseline, Confounds, TrainMode,
    TrainObserver,
};

use crate::checkpoint::{Checkpoint, TrainedModel};
use crate::error::{Error, Result};
use crate::settings::Settings;

pub struct TrainOutput {
    pub checkpoint: Checkpoint,
    pub confounds: Option<Confounds>,
}

pub fn encode(
    vocab: &Vocabulary,
    classes: &LabelSet,
    docs: &[Document],
) -> Result<Vec<EncodedDocument>> {
    Ok(vocab.encode_corpus(docs, classes)?)
}

/// Log-odds table of the training set under `vocab`.
pub fn training_log_odds(
    vocab: &Vocabulary,
    classes: &LabelSet,
    train: &[Document],
    alpha0: f64,
) -> Result<LogOddsTable> {
    Ok(compute_log_odds(
        &encode(vocab, classes, train)?,
        vocab,
        classes,
        alpha0,
    )?)
}

/// Trains one model in `mode`. With `mask_k` set, training and dev inputs
/// have the top-k log-odds words of every class masked first.
pub fn train_model(
    mode: TrainMode,
    settings: &Settings,
    train: &[Document],
    dev: &[Document],
    vocab: &Vocabulary,
    obs: &mut dyn TrainObserver,
) -> Result<TrainOutput> {
    settings.validate()?;
    if train.is_empty() {
        return Err(Error::Core(deconfound_core::Error::EmptyCorpus));
    }
    let mut config = settings.train.clone();
    config.mode = mode;
    let classes = LabelSet::from_documents(train);
    let table = training_log_odds(vocab, &classes, train, config.alpha0)?;
    let (train, dev): (Vec<Document>, Vec<Document>) = match config.mask_k {
        Some(k) => (
            train.iter().map(|d| mask_top_k(d, &table, k)).collect(),
            dev.iter().map(|d| mask_top_k(d, &table, k)).collect(),
        ),
        None => (train.to_vec(), dev.to_vec()),
    };
    let m = classes.len();
    let mut confounds = None;
    let model = match mode {
        TrainMode::Lr => TrainedModel::Linear(Box::new(train_lr_baseline(&train, &config, obs)?)),
        _ => {
            let enc_train = encode(vocab, &classes, &train)?;
            let enc_dev = encode(vocab, &classes, &dev)?;
            let state = match mode.confound_mode() {
                None => pretrain(
                    &enc_train,
                    &enc_dev,
                    &settings.model_config(vocab.size(), m, m),
                    &config,
                    obs,
                )?,
                Some(cm) => {
                    let c = build_confounds(cm, &enc_train, vocab, &classes, &config)?;
                    let mc = settings.model_config(vocab.size(), m, c.num_topics());
                    let state = if mode == TrainMode::GrLo {
                        train_grl(&enc_train, &enc_dev, &c.distributions, &mc, &config, obs)?
                    } else {
                        run_alternating(&enc_train, &enc_dev, &c.distributions, &mc, &config, obs)?
                    };
                    confounds = Some(c);
                    state
                }
            };
            TrainedModel::Neural(Box::new(state))
        }
    };
    Ok(TrainOutput {
        checkpoint: Checkpoint::new(mode, config, classes, vocab.clone(), Some(table), model),
        confounds,
    })
}
