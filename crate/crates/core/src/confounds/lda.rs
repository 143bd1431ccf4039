use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::distribution::ConfoundDistribution;
use crate::corpus::{MASK, PAD};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub num_topics: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Document-topic concentration; `None` means `50 / num_topics`.
    pub alpha: Option<f64>,
    pub beta: f64,
    /// Sweeps of the fold-in inference for unseen documents.
    pub fold_in_iterations: usize,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            num_topics: 50,
            iterations: 1000,
            seed: 0,
            alpha: None,
            beta: 0.01,
            fold_in_iterations: 50,
        }
    }
}

/// Count matrices of a collapsed Gibbs sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModelState {
    pub num_topics: usize,
    pub vocab_size: usize,
    pub alpha: f64,
    pub beta: f64,
    /// `[topic][word]`
    pub topic_word_counts: Vec<u32>,
    pub topic_totals: Vec<u32>,
    /// `[doc][topic]`
    pub doc_topic_counts: Vec<u32>,
    /// Topic of every scored token, per document.
    pub assignments: Vec<Vec<u16>>,
    pub fold_in_iterations: usize,
}

fn scored(id: u32) -> bool {
    id != PAD && id != MASK
}

/// Collapsed Gibbs sampling over token-topic assignments (sequential scan).
/// PAD and MASK tokens are not modelled.
pub fn fit_lda(
    docs: &[Vec<u32>],
    vocab_size: usize,
    config: &LdaConfig,
) -> Result<TopicModelState> {
    let k = config.num_topics;
    if k < 2 || k > u16::MAX as usize {
        return Err(Error::InvalidConfig(
            "num_topics must be in [2, 65535]".into(),
        ));
    }
    if config.iterations == 0 {
        return Err(Error::InvalidConfig("iterations must be at least 1".into()));
    }
    if !(config.beta > 0.0) || config.alpha.is_some_and(|a| !(a > 0.0)) {
        return Err(Error::InvalidConfig(
            "alpha and beta must be positive".into(),
        ));
    }
    if docs.is_empty() || docs.iter().all(|d| !d.iter().any(|&w| scored(w))) {
        return Err(Error::EmptyCorpus);
    }
    let alpha = config.alpha.unwrap_or(50.0 / k as f64);
    let beta = config.beta;
    let v = vocab_size;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = TopicModelState {
        num_topics: k,
        vocab_size: v,
        alpha,
        beta,
        topic_word_counts: vec![0; k * v],
        topic_totals: vec![0; k],
        doc_topic_counts: vec![0; docs.len() * k],
        assignments: Vec::with_capacity(docs.len()),
        fold_in_iterations: config.fold_in_iterations,
    };
    for (d, doc) in docs.iter().enumerate() {
        let mut z = Vec::new();
        for &w in doc.iter().filter(|&&w| scored(w)) {
            if w as usize >= v {
                return Err(Error::TokenOutOfRange { id: w, size: v });
            }
            let t = rng.gen_range(0..k);
            z.push(t as u16);
            state.topic_word_counts[t * v + w as usize] += 1;
            state.topic_totals[t] += 1;
            state.doc_topic_counts[d * k + t] += 1;
        }
        state.assignments.push(z);
    }

    let v_beta = v as f64 * beta;
    let mut weights = vec![0.0f64; k];
    for _ in 0..config.iterations {
        for (d, doc) in docs.iter().enumerate() {
            let words = doc.iter().copied().filter(|&w| scored(w));
            for (i, w) in words.enumerate() {
                let w = w as usize;
                let old = state.assignments[d][i] as usize;
                state.topic_word_counts[old * v + w] -= 1;
                state.topic_totals[old] -= 1;
                state.doc_topic_counts[d * k + old] -= 1;

                let mut total = 0.0;
                for (t, wt) in weights.iter_mut().enumerate() {
                    let p = (state.doc_topic_counts[d * k + t] as f64 + alpha)
                        * (state.topic_word_counts[t * v + w] as f64 + beta)
                        / (state.topic_totals[t] as f64 + v_beta);
                    total += p;
                    *wt = total;
                }
                let u = rng.gen::<f64>() * total;
                let new = weights.iter().position(|&c| u < c).unwrap_or(k - 1);

                state.assignments[d][i] = new as u16;
                state.topic_word_counts[new * v + w] += 1;
                state.topic_totals[new] += 1;
                state.doc_topic_counts[d * k + new] += 1;
            }
        }
    }
    Ok(state)
}

impl TopicModelState {
    pub fn num_documents(&self) -> usize {
        self.assignments.len()
    }

    pub fn total_tokens(&self) -> u64 {
        self.topic_word_counts.iter().map(|&c| c as u64).sum()
    }

    /// Smoothed topic proportions of fitted document `d`.
    pub fn document_distribution(&self, d: usize) -> ConfoundDistribution {
        let k = self.num_topics;
        let counts = &self.doc_topic_counts[d * k..(d + 1) * k];
        let n: u32 = counts.iter().sum();
        let denom = n as f64 + k as f64 * self.alpha;
        let probs = counts
            .iter()
            .map(|&c| (c as f64 + self.alpha) / denom)
            .collect();
        ConfoundDistribution::new(probs).expect("smoothed counts form a simplex")
    }

    /// Distributions of every fitted document, in input order.
    pub fn training_distributions(&self) -> Vec<ConfoundDistribution> {
        (0..self.num_documents())
            .map(|d| self.document_distribution(d))
            .collect()
    }

    /// `n` most frequent word ids of topic `t`, ties by lower id.
    pub fn top_words(&self, t: usize, n: usize) -> Vec<u32> {
        let row = &self.topic_word_counts[t * self.vocab_size..(t + 1) * self.vocab_size];
        let mut ids: Vec<u32> = (0..self.vocab_size as u32).collect();
        ids.sort_by(|&a, &b| row[b as usize].cmp(&row[a as usize]).then(a.cmp(&b)));
        ids.truncate(n);
        ids
    }

    /// Whether every count matrix agrees with the stored assignments.
    pub fn is_consistent(&self, docs: &[Vec<u32>]) -> bool {
        let (k, v) = (self.num_topics, self.vocab_size);
        let mut tw = vec![0u32; k * v];
        let mut dt = vec![0u32; docs.len() * k];
        for (d, doc) in docs.iter().enumerate() {
            let words: Vec<u32> = doc.iter().copied().filter(|&w| scored(w)).collect();
            if words.len() != self.assignments[d].len() {
                return false;
            }
            for (w, &z) in words.iter().zip(&self.assignments[d]) {
                tw[z as usize * v + *w as usize] += 1;
                dt[d * k + z as usize] += 1;
            }
        }
        let totals: Vec<u32> = (0..k)
            .map(|t| tw[t * v..(t + 1) * v].iter().sum())
            .collect();
        tw == self.topic_word_counts && dt == self.doc_topic_counts && totals == self.topic_totals
    }
}

/// Fold-in inference for a new document with topic-word counts frozen.
///
/// Uses the expected-count form of the collapsed Gibbs update (each token
/// keeps a topic responsibility vector instead of a sampled topic), which is
/// deterministic and converges to the same fixed point.
pub fn lda_document_distribution(
    state: &TopicModelState,
    ids: &[u32],
) -> Result<ConfoundDistribution> {
    let k = state.num_topics;
    let v = state.vocab_size;
    let words: Vec<usize> = ids
        .iter()
        .copied()
        .filter(|&w| scored(w))
        .map(|w| w as usize)
        .collect();
    if let Some(&w) = words.iter().find(|&&w| w >= v) {
        return Err(Error::TokenOutOfRange {
            id: w as u32,
            size: v,
        });
    }
    let v_beta = v as f64 * state.beta;
    let phi = |t: usize, w: usize| {
        (state.topic_word_counts[t * v + w] as f64 + state.beta)
            / (state.topic_totals[t] as f64 + v_beta)
    };
    let mut gamma = vec![1.0 / k as f64; words.len() * k];
    let mut n_dk = vec![words.len() as f64 / k as f64; k];
    let mut buf = vec![0.0; k];
    for _ in 0..state.fold_in_iterations.max(1) {
        for (i, &w) in words.iter().enumerate() {
            let g = &mut gamma[i * k..(i + 1) * k];
            let mut total = 0.0;
            for t in 0..k {
                buf[t] = (n_dk[t] - g[t] + state.alpha) * phi(t, w);
                total += buf[t];
            }
            for t in 0..k {
                let new = buf[t] / total;
                n_dk[t] += new - g[t];
                g[t] = new;
            }
        }
    }
    let denom = words.len() as f64 + k as f64 * state.alpha;
    let mut probs: Vec<f64> = n_dk
        .iter()
        .map(|&c| (c.max(0.0) + state.alpha) / denom)
        .collect();
    let s: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= s);
    ConfoundDistribution::new(probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    /// Documents over ids 3..13 (vocabulary A) or 13..23 (vocabulary B).
    pub(crate) fn disjoint_fixture(seed: u64) -> Vec<Vec<u32>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..40)
            .map(|d| {
                let base = if d % 2 == 0 { 3 } else { 13 };
                (0..30).map(|_| base + rng.gen_range(0..10)).collect()
            })
            .collect()
    }

    fn config(seed: u64) -> LdaConfig {
        LdaConfig {
            num_topics: 2,
            iterations: 200,
            seed,
            ..LdaConfig::default()
        }
    }

    #[test]
    fn separates_disjoint_vocabularies() {
        let docs = disjoint_fixture(7);
        let state = fit_lda(&docs, 23, &config(1)).unwrap();
        let a: BTreeSet<u32> = state.top_words(0, 10).into_iter().collect();
        let b: BTreeSet<u32> = state.top_words(1, 10).into_iter().collect();
        assert!(a.is_disjoint(&b));
        // fold-in of a vocabulary-A document lands on the topic owning vocabulary A
        let topic_a = if a.contains(&3) { 0 } else { 1 };
        let t = lda_document_distribution(&state, &[3, 4, 5, 6, 7, 8, 9, 3, 4]).unwrap();
        assert_eq!(crate::math::argmax(t.probs()), topic_a);
    }

    #[test]
    fn counts_are_consistent() {
        let mut docs = disjoint_fixture(3);
        docs[0].push(PAD);
        docs[1].push(MASK);
        let state = fit_lda(&docs, 23, &config(2)).unwrap();
        assert_eq!(state.total_tokens(), 40 * 30);
        assert!(state.is_consistent(&docs));
        for t in state.training_distributions() {
            assert_eq!(t.len(), 2);
            assert!((t.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let docs = disjoint_fixture(5);
        assert_eq!(
            fit_lda(&docs, 23, &config(4)).unwrap(),
            fit_lda(&docs, 23, &config(4)).unwrap()
        );
    }

    #[test]
    fn rejects_bad_arguments() {
        let docs = disjoint_fixture(5);
        let zero_iters = LdaConfig {
            iterations: 0,
            ..config(1)
        };
        assert!(matches!(
            fit_lda(&docs, 23, &zero_iters),
            Err(Error::InvalidConfig(_))
        ));
        let one_topic = LdaConfig {
            num_topics: 1,
            ..config(1)
        };
        assert!(fit_lda(&docs, 23, &one_topic).is_err());
        assert_eq!(fit_lda(&[], 23, &config(1)), Err(Error::EmptyCorpus));
    }

    #[test]
    fn symmetric_state_gives_uniform() {
        let state = TopicModelState {
            num_topics: 3,
            vocab_size: 5,
            alpha: 0.5,
            beta: 0.01,
            topic_word_counts: vec![4; 15],
            topic_totals: vec![20; 3],
            doc_topic_counts: vec![],
            assignments: vec![],
            fold_in_iterations: 20,
        };
        let t = lda_document_distribution(&state, &[1, 3, 4, 4]).unwrap();
        assert_eq!(t.len(), 3);
        for p in t.probs() {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
        // all-UNK documents are scored like any other word
        let u = lda_document_distribution(&state, &[1, 1]).unwrap();
        assert!((u.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
