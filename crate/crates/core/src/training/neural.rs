use alloc::format;
use alloc::vec::Vec;

use super::batch::{batch_gradients, map_docs};
use super::config::{ConfoundMode, TrainConfig};
use super::state::{IterationSummary, LogRecord, Phase, TrainObserver, TrainState};
use crate::confounds::{
    compute_log_odds, document_confound_distribution, fit_lda, word_class_distribution,
    ConfoundDistribution, LdaConfig, LogOddsTable, TopicModelState,
};
use crate::corpus::{EncodedDocument, LabelSet, Vocabulary};
use crate::error::{Error, Result};
use crate::math::{cross_entropy_dist, entropy, ln};
use crate::model::{
    ce_logit_grad, AdversaryTerm, HeadParams, LossParts, ModelConfig, Network, Optimizer,
    Parameters,
};

/// Per-document confound targets and the statistics they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Confounds {
    pub mode: ConfoundMode,
    pub distributions: Vec<ConfoundDistribution>,
    pub table: Option<LogOddsTable>,
    pub topic_model: Option<TopicModelState>,
}

impl Confounds {
    /// Dimension K of every target.
    pub fn num_topics(&self) -> usize {
        self.distributions
            .first()
            .map_or(0, ConfoundDistribution::len)
    }
}

/// Confound distribution of every training document: log-odds posteriors
/// (K = number of classes) or LDA topic mixtures (K = `lda_topics`).
pub fn build_confounds(
    mode: ConfoundMode,
    train: &[EncodedDocument],
    vocab: &Vocabulary,
    classes: &LabelSet,
    config: &TrainConfig,
) -> Result<Confounds> {
    if train.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    match mode {
        ConfoundMode::Lo => {
            let table = compute_log_odds(train, vocab, classes, config.alpha0)?;
            let mut counts = alloc::vec![0usize; classes.len()];
            for d in train {
                counts[d.label] += 1;
            }
            let pwy = word_class_distribution(&table).with_class_prior(&counts);
            let distributions = map_docs(train, |d| document_confound_distribution(&d.ids, &pwy))
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
            Ok(Confounds {
                mode,
                distributions,
                table: Some(table),
                topic_model: None,
            })
        }
        ConfoundMode::Lda => {
            let docs: Vec<Vec<u32>> = train.iter().map(|d| d.ids.clone()).collect();
            let lda = LdaConfig {
                num_topics: config.lda_topics,
                iterations: config.lda_iterations,
                seed: config.seed,
                ..LdaConfig::default()
            };
            let state = fit_lda(&docs, vocab.size(), &lda)?;
            Ok(Confounds {
                mode,
                distributions: state.training_distributions(),
                table: None,
                topic_model: Some(state),
            })
        }
    }
}

/// Fraction of documents whose argmax prediction matches the label.
pub fn accuracy(net: &Network, docs: &[EncodedDocument]) -> Result<f64> {
    if docs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let hits = map_docs(docs, |d| net.predict(&d.ids).map(|p| p == d.label))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(hits.iter().filter(|h| **h).count() as f64 / docs.len() as f64)
}

/// Mean output entropy of the given adversaries over the documents.
pub fn adversary_entropy(
    net: &Network,
    heads: &[HeadParams],
    docs: &[EncodedDocument],
) -> Result<f64> {
    if docs.is_empty() || heads.is_empty() {
        return Err(Error::EmptyInput);
    }
    let per_doc = map_docs(docs, |d| -> Result<f64> {
        let h = net.encoder.forward(&d.ids)?.representation;
        let mut s = 0.0;
        for head in heads {
            s += entropy(&head.forward(&h)?.probs);
        }
        Ok(s)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(per_doc.iter().sum::<f64>() / (docs.len() * heads.len()) as f64)
}

fn check_finite(loss: &LossParts, phase: Phase, step: u64) -> Result<()> {
    if loss.classification.is_finite() && loss.adversary.is_finite() {
        Ok(())
    } else {
        Err(Error::Diverged(format!(
            "{} step {step}: classification loss {}, adversary loss {}",
            phase.name(),
            loss.classification,
            loss.adversary
        )))
    }
}

fn log(
    obs: &mut dyn TrainObserver,
    state: &TrainState,
    loss: LossParts,
    dev: Option<f64>,
    ent: Option<f64>,
) {
    obs.record(&LogRecord {
        step: state.step,
        phase: state.phase,
        iteration: state.iteration,
        classification_loss: loss.classification,
        adversary_loss: loss.adversary,
        combined_loss: loss.combined(),
        dev_accuracy: dev,
        adversary_entropy: ent,
    });
}

fn check_targets(confounds: &[ConfoundDistribution], n: usize, k: usize) -> Result<()> {
    if confounds.len() < n {
        return Err(Error::MissingConfound(confounds.len()));
    }
    match confounds.iter().find(|c| c.len() != k) {
        Some(c) => Err(Error::DimensionMismatch {
            expected: k,
            got: c.len(),
        }),
        None => Ok(()),
    }
}

/// One classification-only update on the given batch.
fn classification_step(
    state: &mut TrainState,
    train: &[EncodedDocument],
    batch: &[usize],
) -> Result<LossParts> {
    let (g, loss) = batch_gradients(&state.network, train, batch, None, |_| AdversaryTerm::None)?;
    state.step += 1;
    check_finite(&loss, state.phase, state.step)?;
    state.optimizer.step(&mut state.network, &g.network);
    Ok(loss)
}

/// One joint gradient-reversal update: the classifier and encoder descend
/// `CE_class - lambda * CE_adv`, the adversary descends `CE_adv`.
pub fn grl_step(
    state: &mut TrainState,
    train: &[EncodedDocument],
    confounds: &[ConfoundDistribution],
    batch: &[usize],
) -> Result<LossParts> {
    let lambda = state.config.lambda;
    let head = state.pool.get(0).ok_or(Error::EmptyPool)?;
    let (g, loss) = batch_gradients(&state.network, train, batch, Some(head), |i| {
        AdversaryTerm::Reversal {
            head,
            target: confounds[i].probs(),
            lambda,
        }
    })?;
    state.step += 1;
    check_finite(&loss, state.phase, state.step)?;
    state.optimizer.step(&mut state.network, &g.network);
    let (cfg_kind, lr) = (state.config.optimizer, state.config.learning_rate);
    let opt = state
        .adversary_optimizer
        .get_or_insert_with(|| Optimizer::new(cfg_kind, lr));
    if let (Some(adv), Some(ga)) = (state.pool.last_mut(), g.adversary.as_ref()) {
        opt.step(adv, ga);
    }
    Ok(loss)
}

/// Epoch loop with dev-accuracy early stopping; restores the best epoch.
fn fit_early_stopping(
    state: &mut TrainState,
    train: &[EncodedDocument],
    dev: &[EncodedDocument],
    confounds: Option<&[ConfoundDistribution]>,
    obs: &mut dyn TrainObserver,
) -> Result<()> {
    let cfg = state.config.clone();
    state.best_dev = -1.0;
    state.epochs_without_improvement = 0;
    let mut best = (state.network.clone(), state.pool.heads().to_vec());
    for _ in 0..cfg.max_epochs {
        let mut total = LossParts::default();
        let mut seen = 0usize;
        for batch in state.sampler.epoch(cfg.batch_size) {
            let loss = match confounds {
                None => classification_step(state, train, &batch)?,
                Some(t) => grl_step(state, train, t, &batch)?,
            };
            log(obs, state, loss, None, None);
            let w = batch.len() as f64;
            total += LossParts {
                classification: loss.classification * w,
                adversary: loss.adversary * w,
            };
            seen += batch.len();
        }
        state.epochs += 1;
        let acc = accuracy(&state.network, dev)?;
        let mean = LossParts {
            classification: total.classification / seen as f64,
            adversary: total.adversary / seen as f64,
        };
        log(obs, state, mean, Some(acc), None);
        if acc > state.best_dev {
            state.best_dev = acc;
            state.epochs_without_improvement = 0;
            best = (state.network.clone(), state.pool.heads().to_vec());
        } else {
            state.epochs_without_improvement += 1;
            if state.epochs_without_improvement >= cfg.patience {
                break;
            }
        }
    }
    state.network = best.0;
    state.pool.set_heads(best.1);
    Ok(())
}

fn require_sets(train: &[EncodedDocument], dev: &[EncodedDocument]) -> Result<()> {
    if train.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if dev.is_empty() {
        return Err(Error::InvalidConfig("dev set is empty".into()));
    }
    Ok(())
}

/// Trains encoder and classifier on the classification loss alone until
/// dev accuracy stops improving for `patience` epochs.
pub fn pretrain(
    train: &[EncodedDocument],
    dev: &[EncodedDocument],
    model: &ModelConfig,
    config: &TrainConfig,
    obs: &mut dyn TrainObserver,
) -> Result<TrainState> {
    config.validate()?;
    require_sets(train, dev)?;
    let mut state = TrainState::new(Network::init(model)?, config, train.len());
    state.phase = Phase::Pretrain;
    fit_early_stopping(&mut state, train, dev, None, obs)?;
    obs.phase_end(&state);
    Ok(state)
}

/// Trains a fresh adversary for `adversary_steps` minibatches to predict the
/// confound distributions from the frozen encoder, then appends it to the
/// pool.
pub fn topic_training_phase(
    state: &mut TrainState,
    train: &[EncodedDocument],
    confounds: &[ConfoundDistribution],
    obs: &mut dyn TrainObserver,
) -> Result<()> {
    let cfg = state.config.clone();
    check_targets(confounds, train.len(), state.network.config.num_topics)?;
    state.phase = Phase::TopicTrain;
    let reps = map_docs(train, |d| {
        state
            .network
            .encoder
            .forward(&d.ids)
            .map(|t| t.representation)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut head = state.network.new_adversary(state.pool.len() as u64);
    let mut opt = Optimizer::new(cfg.optimizer, cfg.learning_rate);
    for _ in 0..cfg.adversary_steps {
        let batch = state.sampler.next_batch(cfg.batch_size);
        let scale = 1.0 / batch.len() as f64;
        let mut grad = head.zeros_like();
        let mut loss = LossParts::default();
        for &i in &batch {
            let tr = head.forward(&reps[i])?;
            let t = confounds[i].probs();
            loss.adversary += cross_entropy_dist(&tr.probs, t)? * scale;
            head.backward(&tr, &ce_logit_grad(&tr.probs, t, scale), Some(&mut grad));
        }
        state.step += 1;
        check_finite(&loss, state.phase, state.step)?;
        opt.step(&mut head, &grad);
        log(obs, state, loss, None, None);
    }
    state.pool.push(head);
    obs.phase_end(state);
    Ok(())
}

/// Updates encoder and classifier for `forgetting_steps` minibatches on the
/// label loss plus `CE(adv_u(h), U_K)`, with `u` drawn uniformly from the
/// pool at every step. Adversaries stay fixed.
pub fn topic_forgetting_phase(
    state: &mut TrainState,
    train: &[EncodedDocument],
    obs: &mut dyn TrainObserver,
) -> Result<()> {
    if state.pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    let cfg = state.config.clone();
    state.phase = Phase::TopicForget;
    for _ in 0..cfg.forgetting_steps {
        let u = state.pool.select()?;
        let batch = state.sampler.next_batch(cfg.batch_size);
        let head = state.pool.get(u).ok_or(Error::EmptyPool)?;
        let (g, loss) = batch_gradients(&state.network, train, &batch, None, |_| {
            AdversaryTerm::Uniform { head }
        })?;
        state.step += 1;
        check_finite(&loss, state.phase, state.step)?;
        state.optimizer.step(&mut state.network, &g.network);
        log(obs, state, loss, None, None);
    }
    obs.phase_end(state);
    Ok(())
}

/// Pretraining followed by `outer_iterations` rounds of topic training and
/// topic forgetting. The returned encoder and classifier are those of the
/// round with the best dev accuracy among rounds whose mean adversary
/// entropy reaches `entropy_floor * ln K` (later rounds win ties); if no
/// round qualifies, the round with the highest entropy. The full pool is
/// kept.
pub fn run_alternating(
    train: &[EncodedDocument],
    dev: &[EncodedDocument],
    confounds: &[ConfoundDistribution],
    model: &ModelConfig,
    config: &TrainConfig,
    obs: &mut dyn TrainObserver,
) -> Result<TrainState> {
    config.validate()?;
    require_sets(train, dev)?;
    check_targets(confounds, train.len(), model.num_topics)?;
    let mut state = pretrain(train, dev, model, config, obs)?;
    let floor = config.entropy_floor * ln(model.num_topics as f64);
    let mut eligible: Option<(IterationSummary, Network)> = None;
    let mut fallback: Option<(IterationSummary, Network)> = None;
    for j in 1..=config.outer_iterations {
        topic_training_phase(&mut state, train, confounds, obs)?;
        topic_forgetting_phase(&mut state, train, obs)?;
        state.iteration = j;
        let summary = IterationSummary {
            iteration: j,
            dev_accuracy: accuracy(&state.network, dev)?,
            adversary_entropy: adversary_entropy(&state.network, state.pool.heads(), dev)?,
        };
        state.history.push(summary);
        log(
            obs,
            &state,
            LossParts::default(),
            Some(summary.dev_accuracy),
            Some(summary.adversary_entropy),
        );
        if summary.adversary_entropy >= floor
            && eligible
                .as_ref()
                .map_or(true, |(s, _)| summary.dev_accuracy >= s.dev_accuracy)
        {
            eligible = Some((summary, state.network.clone()));
        }
        if fallback.as_ref().map_or(true, |(s, _)| {
            summary.adversary_entropy >= s.adversary_entropy
        }) {
            fallback = Some((summary, state.network.clone()));
        }
    }
    if let Some((summary, net)) = eligible.or(fallback) {
        state.network = net;
        state.selected_iteration = Some(summary.iteration);
        state.best_dev = summary.dev_accuracy;
    }
    Ok(state)
}

/// Joint training with one adversary behind a gradient-reversal layer,
/// early-stopped on dev accuracy.
pub fn train_grl(
    train: &[EncodedDocument],
    dev: &[EncodedDocument],
    confounds: &[ConfoundDistribution],
    model: &ModelConfig,
    config: &TrainConfig,
    obs: &mut dyn TrainObserver,
) -> Result<TrainState> {
    config.validate()?;
    require_sets(train, dev)?;
    check_targets(confounds, train.len(), model.num_topics)?;
    let net = Network::init(model)?;
    let mut state = TrainState::new(net, config, train.len());
    state.phase = Phase::Reversal;
    state.pool.push(state.network.new_adversary(0));
    state.adversary_optimizer = Some(Optimizer::new(config.optimizer, config.learning_rate));
    fit_early_stopping(&mut state, train, dev, Some(confounds), obs)?;
    obs.phase_end(&state);
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Domain, RESERVED};
    use crate::model::{OptimizerKind, SeededRng};
    use crate::training::NoopObserver;
    use alloc::vec;
    use rand::Rng;

    const FILLER: core::ops::Range<u32> = 10..30;

    /// Documents of filler tokens carrying one marker token `RESERVED + y`.
    fn marker_docs(per_class: usize, classes: usize, seed: u64) -> Vec<EncodedDocument> {
        let mut rng = SeededRng::new(seed);
        let mut docs = Vec::new();
        for i in 0..per_class * classes {
            let y = i % classes;
            let mut ids: Vec<u32> = (0..6).map(|_| rng.gen_range(FILLER)).collect();
            let pos = rng.gen_range(0..=ids.len());
            ids.insert(pos, (RESERVED + y) as u32);
            docs.push(EncodedDocument {
                ids,
                label: y,
                domain: Domain::In,
            });
        }
        docs
    }

    fn model(classes: usize, topics: usize) -> ModelConfig {
        let mut m = ModelConfig::new(FILLER.end as usize, classes, topics);
        m.embed_dim = 6;
        m.hidden_dim = 6;
        m.head_hidden = 8;
        m
    }

    fn config() -> TrainConfig {
        TrainConfig {
            batch_size: 8,
            learning_rate: 0.02,
            adversary_steps: 40,
            forgetting_steps: 40,
            outer_iterations: 2,
            max_epochs: 3,
            ..TrainConfig::default()
        }
    }

    /// Confound targets that follow the marker, smoothed.
    fn marker_confounds(docs: &[EncodedDocument], k: usize) -> Vec<ConfoundDistribution> {
        docs.iter()
            .map(|d| {
                let y = d
                    .ids
                    .iter()
                    .find(|&&i| (i as usize) < RESERVED + k && i as usize >= RESERVED)
                    .unwrap();
                let mut p = vec![0.2 / (k - 1) as f64; k];
                p[*y as usize - RESERVED] = 0.8;
                ConfoundDistribution::new(p).unwrap()
            })
            .collect()
    }

    fn mean_ce(
        net: &Network,
        head: &HeadParams,
        docs: &[EncodedDocument],
        t: &[ConfoundDistribution],
    ) -> f64 {
        let mut s = 0.0;
        for (d, t) in docs.iter().zip(t) {
            let h = net.encoder.forward(&d.ids).unwrap().representation;
            s += cross_entropy_dist(&head.forward(&h).unwrap().probs, t.probs()).unwrap();
        }
        s / docs.len() as f64
    }

    #[test]
    fn marker_fixture_is_learned_within_three_epochs() {
        let (train, dev) = (marker_docs(20, 3, 1), marker_docs(5, 3, 2));
        let mut log: Vec<LogRecord> = Vec::new();
        let state = pretrain(&train, &dev, &model(3, 3), &config(), &mut log).unwrap();
        assert!(state.epochs <= 3);
        assert_eq!(state.best_dev, 1.0);
        assert_eq!(accuracy(&state.network, &dev).unwrap(), 1.0);
        assert_eq!(
            log.iter().filter(|r| r.dev_accuracy.is_some()).count(),
            state.epochs
        );
        let one = pretrain(
            &train,
            &dev,
            &model(3, 3),
            &TrainConfig {
                max_epochs: 1,
                ..config()
            },
            &mut NoopObserver,
        )
        .unwrap();
        let loss: f64 = train
            .iter()
            .map(|d| {
                one.network
                    .loss(&d.ids, d.label, AdversaryTerm::None)
                    .unwrap()
                    .classification
            })
            .sum::<f64>()
            / train.len() as f64;
        assert!(loss < ln(3.0), "loss after one epoch {loss}");
    }

    #[test]
    fn patience_stops_when_accuracy_is_flat() {
        let (train, dev) = (marker_docs(4, 3, 1), marker_docs(2, 3, 2));
        let cfg = TrainConfig {
            learning_rate: 0.0,
            optimizer: OptimizerKind::Sgd,
            patience: 1,
            max_epochs: 10,
            ..config()
        };
        let init = Network::init(&model(3, 3)).unwrap();
        let state = pretrain(&train, &dev, &model(3, 3), &cfg, &mut NoopObserver).unwrap();
        assert_eq!(state.epochs, 2);
        assert_eq!(state.network, init);
    }

    #[test]
    fn topic_training_freezes_encoder_and_grows_pool() {
        let (train, dev) = (marker_docs(20, 3, 1), marker_docs(5, 3, 2));
        let t = marker_confounds(&train, 3);
        let cfg = TrainConfig {
            adversary_steps: 150,
            ..config()
        };
        let mut state = pretrain(&train, &dev, &model(3, 3), &cfg, &mut NoopObserver).unwrap();
        let before = state.network.checksum();
        topic_training_phase(&mut state, &train, &t, &mut NoopObserver).unwrap();
        assert_eq!(state.pool.len(), 1);
        assert_eq!(state.network.checksum(), before);
        let ce = mean_ce(&state.network, &state.pool.heads()[0], &train, &t);
        assert!(ce < ln(3.0), "adversary CE {ce}");
        let fresh = state.network.new_adversary(7);
        assert!(ce < mean_ce(&state.network, &fresh, &train, &t));
        assert_eq!(
            topic_training_phase(&mut state, &train, &t[..3], &mut NoopObserver),
            Err(Error::MissingConfound(3))
        );
    }

    #[test]
    fn forgetting_freezes_adversaries_and_raises_entropy() {
        // a constant label leaves no class signal to compete with the adversary term
        let mut train = marker_docs(20, 3, 1);
        let mut heldout = marker_docs(5, 3, 2);
        let t = marker_confounds(&train, 3);
        train
            .iter_mut()
            .chain(heldout.iter_mut())
            .for_each(|d| d.label = 0);
        let cfg = TrainConfig {
            adversary_steps: 150,
            forgetting_steps: 150,
            ..config()
        };
        let mut state = pretrain(&train, &heldout, &model(2, 3), &cfg, &mut NoopObserver).unwrap();
        topic_training_phase(&mut state, &train, &t, &mut NoopObserver).unwrap();
        let pool = state.pool.checksums();
        let h0 = adversary_entropy(&state.network, state.pool.heads(), &heldout).unwrap();
        let mut twin = state.clone();
        let mut log: Vec<LogRecord> = Vec::new();
        topic_forgetting_phase(&mut state, &train, &mut log).unwrap();
        assert_eq!(state.pool.checksums(), pool);
        let h1 = adversary_entropy(&state.network, state.pool.heads(), &heldout).unwrap();
        assert!(h1 > h0, "entropy {h0} -> {h1}");
        for r in &log {
            assert!((r.combined_loss - r.classification_loss - r.adversary_loss).abs() < 1e-12);
        }
        topic_forgetting_phase(&mut twin, &train, &mut NoopObserver).unwrap();
        assert_eq!(twin, state);
    }

    #[test]
    fn forgetting_requires_a_pool() {
        let train = marker_docs(2, 3, 1);
        let mut state =
            TrainState::new(Network::init(&model(3, 3)).unwrap(), &config(), train.len());
        assert_eq!(
            topic_forgetting_phase(&mut state, &train, &mut NoopObserver),
            Err(Error::EmptyPool)
        );
    }

    #[test]
    fn alternating_pool_size_and_determinism() {
        let (train, dev) = (marker_docs(6, 3, 1), marker_docs(2, 3, 2));
        let t = marker_confounds(&train, 3);
        let cfg = TrainConfig {
            adversary_steps: 5,
            forgetting_steps: 5,
            outer_iterations: 1,
            max_epochs: 1,
            ..config()
        };
        let a = run_alternating(&train, &dev, &t, &model(3, 3), &cfg, &mut NoopObserver).unwrap();
        assert_eq!(a.pool.len(), 1);
        assert_eq!(a.history.len(), 1);
        assert_eq!(a.selected_iteration, Some(1));
        let b = run_alternating(&train, &dev, &t, &model(3, 3), &cfg, &mut NoopObserver).unwrap();
        assert_eq!(a, b);
        let c = run_alternating(
            &train,
            &dev,
            &t,
            &model(3, 3),
            &TrainConfig {
                seed: 9,
                ..cfg.clone()
            },
            &mut NoopObserver,
        )
        .unwrap();
        assert_ne!(a.network, c.network);
        assert_eq!(
            run_alternating(&train, &[], &t, &model(3, 3), &cfg, &mut NoopObserver),
            Err(Error::InvalidConfig("dev set is empty".into()))
        );
        assert_eq!(
            run_alternating(&train, &dev, &t[..2], &model(3, 3), &cfg, &mut NoopObserver),
            Err(Error::MissingConfound(2))
        );
    }

    #[test]
    fn reversal_with_zero_lambda_is_plain_classification() {
        let train = marker_docs(4, 3, 1);
        let t = marker_confounds(&train, 3);
        let cfg = TrainConfig {
            lambda: 0.0,
            optimizer: OptimizerKind::Sgd,
            learning_rate: 0.1,
            ..config()
        };
        let mut a = TrainState::new(Network::init(&model(3, 3)).unwrap(), &cfg, train.len());
        a.pool.push(a.network.new_adversary(0));
        let mut b = a.clone();
        let batch = [0, 1, 2, 3, 4];
        grl_step(&mut a, &train, &t, &batch).unwrap();
        classification_step(&mut b, &train, &batch).unwrap();
        assert_eq!(a.network, b.network);
        assert_ne!(a.pool.checksums(), b.pool.checksums());
    }

    #[test]
    fn reversal_step_matches_hand_assembled_gradient() {
        let mut m = model(3, 3);
        m.embed_dim = 3;
        m.hidden_dim = 3;
        m.head_hidden = 4;
        let doc = EncodedDocument {
            ids: vec![RESERVED as u32, 12, 17, 11, 4],
            label: 1,
            domain: Domain::In,
        };
        let target = ConfoundDistribution::new(vec![0.6, 0.3, 0.1]).unwrap();
        let (lr, lambda) = (0.1, 0.2);
        let cfg = TrainConfig {
            lambda,
            learning_rate: lr,
            optimizer: OptimizerKind::Sgd,
            ..config()
        };
        let mut state = TrainState::new(Network::init(&m).unwrap(), &cfg, 1);
        state.pool.push(state.network.new_adversary(0));
        let net = state.network.clone();
        let adv = state.pool.heads()[0].clone();
        let class_ce = |n: &Network| {
            n.loss(&doc.ids, doc.label, AdversaryTerm::None)
                .unwrap()
                .classification
        };
        let adv_ce = |n: &Network| {
            let h = n.encoder.forward(&doc.ids).unwrap().representation;
            cross_entropy_dist(&adv.forward(&h).unwrap().probs, target.probs()).unwrap()
        };
        let eps = 1e-6;
        let mut expected = net.clone();
        for i in 0..net.num_params() {
            let fd = |f: &dyn Fn(&Network) -> f64| {
                let (mut p, mut q) = (net.clone(), net.clone());
                p.set_flat(i, net.get_flat(i) + eps);
                q.set_flat(i, net.get_flat(i) - eps);
                (f(&p) - f(&q)) / (2.0 * eps)
            };
            let g = fd(&class_ce) - lambda * fd(&adv_ce);
            expected.set_flat(i, net.get_flat(i) - lr * g);
        }
        grl_step(&mut state, &[doc.clone()], &[target], &[0]).unwrap();
        for i in 0..net.num_params() {
            let (got, want) = (state.network.get_flat(i), expected.get_flat(i));
            assert!((got - want).abs() < 1e-6, "param {i}: {got} vs {want}");
        }
    }

    #[test]
    fn grl_training_keeps_one_adversary() {
        let (train, dev) = (marker_docs(6, 3, 1), marker_docs(2, 3, 2));
        let t = marker_confounds(&train, 3);
        let state = train_grl(
            &train,
            &dev,
            &t,
            &model(3, 3),
            &TrainConfig {
                max_epochs: 2,
                ..config()
            },
            &mut NoopObserver,
        )
        .unwrap();
        assert_eq!(state.pool.len(), 1);
        assert!(state.epochs >= 1 && state.epochs <= 2);
        assert_eq!(state.phase, Phase::Reversal);
    }

    #[test]
    fn lo_confounds_are_distributions_over_classes() {
        let train = marker_docs(6, 3, 1);
        let vocab = crate::corpus::Vocabulary::from_tokens(
            (RESERVED as u32..FILLER.end).map(|i| alloc::format!("w{i}")),
        );
        let classes = LabelSet::new(vec!["a".into(), "b".into(), "c".into()]);
        let c = build_confounds(ConfoundMode::Lo, &train, &vocab, &classes, &config()).unwrap();
        assert_eq!(c.num_topics(), 3);
        assert_eq!(c.distributions.len(), train.len());
        for (d, t) in train.iter().zip(&c.distributions) {
            assert!((t.probs().iter().sum::<f64>() - 1.0).abs() < 1e-6);
            let argmax = (0..3)
                .max_by(|&a, &b| t.probs()[a].total_cmp(&t.probs()[b]))
                .unwrap();
            assert_eq!(argmax, d.label);
        }
    }
}
