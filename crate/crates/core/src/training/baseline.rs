use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::state::{LogRecord, Phase, TrainObserver};
use crate::corpus::{Document, LabelSet};
use crate::error::{Error, Result};
use crate::math::{argmax, cross_entropy_dist, dot, softmax_in_place, sqrt};
use crate::model::{Optimizer, OptimizerKind, Parameters};

const FUNCTION_WORDS_FILE: &str = include_str!("../../data/function_words.txt");

/// The bundled function-word list, in file order.
pub fn function_words() -> Vec<String> {
    FUNCTION_WORDS_FILE
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}

fn is_sentence_end(t: &str) -> bool {
    matches!(t, "." | "!" | "?")
}

/// Mean sentence length in tokens; sentences end at `.`, `!` or `?`
/// (the delimiter counts towards its sentence).
pub fn mean_sentence_length(tokens: &[String]) -> f64 {
    let mut sentences = 0usize;
    let mut open = false;
    for t in tokens {
        open = true;
        if is_sentence_end(t) {
            sentences += 1;
            open = false;
        }
    }
    if open {
        sentences += 1;
    }
    if sentences == 0 {
        0.0
    } else {
        tokens.len() as f64 / sentences as f64
    }
}

fn trigrams(pos: &[String]) -> impl Iterator<Item = String> + '_ {
    pos.windows(3)
        .map(|w| alloc::format!("{} {} {}", w[0], w[1], w[2]))
}

/// Stylistic feature layout: function-word frequencies, POS-trigram
/// frequencies (only if the training data carried POS tags), and mean
/// sentence length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpace {
    pub function_words: Vec<String>,
    pub pos_trigrams: Vec<String>,
}

impl FeatureSpace {
    pub fn new(function_words: Vec<String>, train: &[Document]) -> Self {
        let mut tri: Vec<String> = train
            .iter()
            .filter_map(|d| d.pos.as_deref())
            .flat_map(trigrams)
            .collect::<alloc::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        tri.shrink_to_fit();
        FeatureSpace {
            function_words,
            pos_trigrams: tri,
        }
    }

    pub fn dim(&self) -> usize {
        self.function_words.len() + self.pos_trigrams.len() + 1
    }

    pub fn features(&self, doc: &Document) -> Vec<f64> {
        let nf = self.function_words.len();
        let np = self.pos_trigrams.len();
        let mut x = vec![0.0; self.dim()];
        if !doc.tokens.is_empty() {
            let index: BTreeMap<&str, usize> = self
                .function_words
                .iter()
                .enumerate()
                .map(|(i, w)| (w.as_str(), i))
                .collect();
            let inv = 1.0 / doc.tokens.len() as f64;
            for t in &doc.tokens {
                if let Some(&i) = index.get(t.as_str()) {
                    x[i] += inv;
                }
            }
        }
        if let Some(pos) = doc.pos.as_deref() {
            let n = pos.len().saturating_sub(2);
            if n > 0 && np > 0 {
                let inv = 1.0 / n as f64;
                for t in trigrams(pos) {
                    if let Ok(i) = self.pos_trigrams.binary_search(&t) {
                        x[nf + i] += inv;
                    }
                }
            }
        }
        x[nf + np] = mean_sentence_length(&doc.tokens);
        x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LinearParams {
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl Parameters for LinearParams {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![&self.weights, &self.bias]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![&mut self.weights, &mut self.bias]
    }
}

/// Multinomial logistic regression over standardized stylistic features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub classes: LabelSet,
    pub space: FeatureSpace,
    mean: Vec<f64>,
    scale: Vec<f64>,
    params: LinearParams,
    pub iterations: usize,
}

impl LinearModel {
    fn standardized(&self, doc: &Document) -> Vec<f64> {
        let mut x = self.space.features(doc);
        for ((v, m), s) in x.iter_mut().zip(&self.mean).zip(&self.scale) {
            *v = (*v - m) / s;
        }
        x
    }

    fn probs_of(&self, x: &[f64]) -> Vec<f64> {
        let d = self.space.dim();
        let mut z: Vec<f64> = self
            .params
            .weights
            .chunks_exact(d)
            .zip(&self.params.bias)
            .map(|(w, b)| dot(w, x) + b)
            .collect();
        softmax_in_place(&mut z);
        z
    }

    pub fn predict_proba(&self, doc: &Document) -> Vec<f64> {
        self.probs_of(&self.standardized(doc))
    }

    pub fn predict(&self, doc: &Document) -> usize {
        argmax(&self.predict_proba(doc))
    }
}

const LR_MAX_ITERATIONS: usize = 5000;
const LR_LEARNING_RATE: f64 = 0.05;
const LR_TOLERANCE: f64 = 1e-9;

/// Fits the stylistic baseline by full-batch gradient descent on mean
/// cross-entropy plus `config.l2 / 2 * |W|^2` until the objective changes by
/// less than a relative 1e-9 between iterations.
pub fn train_lr_baseline(
    train: &[Document],
    config: &TrainConfig,
    obs: &mut dyn TrainObserver,
) -> Result<LinearModel> {
    train_lr_with_words(train, function_words(), config, obs)
}

pub fn train_lr_with_words(
    train: &[Document],
    words: Vec<String>,
    config: &TrainConfig,
    obs: &mut dyn TrainObserver,
) -> Result<LinearModel> {
    config.validate()?;
    let usable: Vec<&Document> = train.iter().filter(|d| !d.tokens.is_empty()).collect();
    if usable.is_empty() {
        return Err(Error::NoUsableDocuments);
    }
    let owned: Vec<Document> = usable.iter().map(|d| (*d).clone()).collect();
    let classes = LabelSet::from_documents(&owned);
    let space = FeatureSpace::new(words, &owned);
    let d = space.dim();
    let m = classes.len();
    let labels = owned
        .iter()
        .map(|doc| classes.index_of(&doc.label))
        .collect::<Result<Vec<_>>>()?;
    let raw: Vec<Vec<f64>> = owned.iter().map(|doc| space.features(doc)).collect();
    let n = raw.len() as f64;
    let mut mean = vec![0.0; d];
    for x in &raw {
        for (a, v) in mean.iter_mut().zip(x) {
            *a += v / n;
        }
    }
    let mut scale = vec![0.0; d];
    for x in &raw {
        for ((a, v), mu) in scale.iter_mut().zip(x).zip(&mean) {
            *a += (v - mu) * (v - mu) / n;
        }
    }
    for s in &mut scale {
        *s = if *s > 1e-24 { sqrt(*s) } else { 1.0 };
    }
    let mut model = LinearModel {
        classes,
        space,
        mean,
        scale,
        params: LinearParams {
            weights: vec![0.0; m * d],
            bias: vec![0.0; m],
        },
        iterations: 0,
    };
    let xs: Vec<Vec<f64>> = owned.iter().map(|doc| model.standardized(doc)).collect();
    let mut opt = Optimizer::new(OptimizerKind::Adam, LR_LEARNING_RATE);
    let mut previous = f64::INFINITY;
    for it in 0..LR_MAX_ITERATIONS {
        let mut grad = model.params.zeros_like();
        let mut loss = 0.0;
        for (x, &y) in xs.iter().zip(&labels) {
            let p = model.probs_of(x);
            let mut t = vec![0.0; m];
            t[y] = 1.0;
            loss += cross_entropy_dist(&p, &t)? / n;
            for c in 0..m {
                let r = (p[c] - t[c]) / n;
                crate::math::axpy(r, x, &mut grad.weights[c * d..(c + 1) * d]);
                grad.bias[c] += r;
            }
        }
        let w2: f64 = dot(&model.params.weights, &model.params.weights);
        loss += 0.5 * config.l2 * w2;
        crate::math::axpy(config.l2, &model.params.weights, &mut grad.weights);
        if !loss.is_finite() {
            return Err(Error::Diverged(alloc::format!(
                "logistic regression iteration {it}: loss {loss}"
            )));
        }
        obs.record(&LogRecord {
            step: it as u64 + 1,
            phase: Phase::Linear,
            iteration: 0,
            classification_loss: loss,
            adversary_loss: 0.0,
            combined_loss: loss,
            dev_accuracy: None,
            adversary_entropy: None,
        });
        model.iterations = it + 1;
        if (previous - loss).abs() <= LR_TOLERANCE * loss.abs().max(1e-12) {
            break;
        }
        previous = loss;
        opt.step(&mut model.params, &grad);
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Domain;
    use alloc::string::ToString;

    fn doc(tokens: &[&str], label: &str) -> Document {
        Document::new(
            tokens.iter().map(|t| t.to_string()).collect(),
            label,
            Domain::In,
        )
        .unwrap()
    }

    #[test]
    fn function_word_list_is_clean() {
        let w = function_words();
        assert!((280..=320).contains(&w.len()));
        let set: alloc::collections::BTreeSet<_> = w.iter().collect();
        assert_eq!(set.len(), w.len());
        assert!(w.iter().all(|x| x.to_lowercase() == *x && !x.contains(' ')));
    }

    #[test]
    fn sentence_length() {
        let toks: Vec<String> = ["a", "b", ".", "c", "d", "e", "f", "!"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(mean_sentence_length(&toks), 4.0);
        let toks: Vec<String> = ["a", "b", ".", "c"].iter().map(|s| s.to_string()).collect();
        assert_eq!(mean_sentence_length(&toks), 2.0);
    }

    #[test]
    fn feature_blocks() {
        let train = [doc(&["the", "cat", "."], "a")];
        let space = FeatureSpace::new(vec!["the".into(), "of".into()], &train);
        assert_eq!(space.dim(), 3);
        let x = space.features(&doc(&["cat", "sat", "."], "a"));
        assert_eq!(&x[..2], &[0.0, 0.0]);
        let x = space.features(&train[0]);
        assert!((x[0] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(x[2], 3.0);

        let tagged = doc(&["the", "cat", "sat"], "a")
            .with_pos(vec!["DT".into(), "NN".into(), "VBD".into()])
            .unwrap();
        let space = FeatureSpace::new(vec!["the".into()], &[tagged.clone()]);
        assert_eq!(space.pos_trigrams, vec!["DT NN VBD".to_string()]);
        assert_eq!(space.features(&tagged)[1], 1.0);
    }

    #[test]
    fn sentence_length_separates_classes() {
        let mut train = Vec::new();
        for i in 0..20 {
            let w = ["x", "y", "z"][i % 3];
            let short: Vec<&str> = [w, w, w, w, "."].repeat(4);
            let long: Vec<&str> = [[w; 19].as_slice(), &["."]].concat().repeat(2);
            train.push(doc(&short, "a"));
            train.push(doc(&long, "b"));
        }
        let model = train_lr_with_words(
            &train,
            Vec::new(),
            &TrainConfig::default(),
            &mut super::super::NoopObserver,
        )
        .unwrap();
        assert_eq!(model.space.dim(), 1);
        for d in &train {
            assert_eq!(model.classes.name(model.predict(d)), d.label);
        }
    }

    #[test]
    fn empty_training_set_errors() {
        let r = train_lr_baseline(
            &[],
            &TrainConfig::default(),
            &mut super::super::NoopObserver,
        );
        assert_eq!(r.unwrap_err(), Error::NoUsableDocuments);
    }
}
