use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::log_odds::{LogOddsTable, SCORE_CLAMP};
use crate::corpus::{MASK, PAD};
use crate::error::{Error, Result};
use crate::math::{entropy, ln, sigmoid, softmax_in_place};

/// Per-document distribution over K latent topics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConfoundDistribution(Vec<f64>);

impl ConfoundDistribution {
    /// Validates nonnegativity and normalization (within 1e-6).
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyInput);
        }
        let total: f64 = probs.iter().sum();
        if probs.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidConfig(
                "confound distribution is not a simplex".into(),
            ));
        }
        Ok(ConfoundDistribution(probs))
    }

    pub fn uniform(k: usize) -> Self {
        ConfoundDistribution(crate::math::uniform(k))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.0)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// `p(w | y)` for every class, kept in log space, plus an optional class prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordClassDistribution {
    num_classes: usize,
    vocab_size: usize,
    log_probs: Vec<f64>,
    log_prior: Option<Vec<f64>>,
}

impl WordClassDistribution {
    /// `p(w|y) = sigmoid(lo(w,y)) / sum_w' sigmoid(lo(w',y))`, scores clamped
    /// to `[-SCORE_CLAMP, SCORE_CLAMP]` first.
    pub fn from_table(table: &LogOddsTable) -> Self {
        let m = table.num_classes();
        let v = table.vocab_size();
        let mut log_probs = Vec::with_capacity(m * v);
        for y in 0..m {
            let sig: Vec<f64> = table
                .row(y)
                .iter()
                .map(|s| sigmoid(s.clamp(-SCORE_CLAMP, SCORE_CLAMP)))
                .collect();
            let log_z = ln(sig.iter().sum::<f64>());
            log_probs.extend(sig.iter().map(|s| ln(*s) - log_z));
        }
        WordClassDistribution {
            num_classes: m,
            vocab_size: v,
            log_probs,
            log_prior: None,
        }
    }

    /// Attaches `log p(y)` unless the label histogram is balanced within 1%.
    pub fn with_class_prior(mut self, class_counts: &[usize]) -> Self {
        let total: usize = class_counts.iter().sum();
        if class_counts.len() != self.num_classes || total == 0 {
            return self;
        }
        let share = 1.0 / self.num_classes as f64;
        let balanced = class_counts
            .iter()
            .all(|&c| ((c as f64 / total as f64) - share).abs() <= 0.01 * share);
        self.log_prior = if balanced {
            None
        } else {
            Some(
                class_counts
                    .iter()
                    .map(|&c| ln((c.max(1)) as f64 / total as f64))
                    .collect(),
            )
        };
        self
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn has_prior(&self) -> bool {
        self.log_prior.is_some()
    }

    pub fn prob(&self, class: usize, id: u32) -> f64 {
        crate::math::exp(self.log_prob(class, id))
    }

    pub fn log_prob(&self, class: usize, id: u32) -> f64 {
        self.log_probs[class * self.vocab_size + id as usize]
    }

    /// Row `y` of the matrix as probabilities.
    pub fn row(&self, class: usize) -> Vec<f64> {
        self.log_probs[class * self.vocab_size..(class + 1) * self.vocab_size]
            .iter()
            .map(|l| crate::math::exp(*l))
            .collect()
    }
}

/// Normalized sigmoid of the clamped log-odds scores, one row per class.
pub fn word_class_distribution(table: &LogOddsTable) -> WordClassDistribution {
    WordClassDistribution::from_table(table)
}

/// Bag-of-words posterior over classes, `t_y ∝ p(y) prod_i p(w_i | y)`,
/// evaluated in log space. PAD and MASK tokens are skipped.
pub fn document_confound_distribution(
    ids: &[u32],
    pwy: &WordClassDistribution,
) -> Result<ConfoundDistribution> {
    let m = pwy.num_classes;
    let mut logits = match &pwy.log_prior {
        Some(p) => p.clone(),
        None => alloc::vec![0.0; m],
    };
    let mut scored = 0usize;
    for &id in ids {
        if id == PAD || id == MASK {
            continue;
        }
        if id as usize >= pwy.vocab_size {
            return Err(Error::TokenOutOfRange {
                id,
                size: pwy.vocab_size,
            });
        }
        scored += 1;
        for (y, l) in logits.iter_mut().enumerate() {
            *l += pwy.log_prob(y, id);
        }
    }
    if scored == 0 {
        return Err(Error::NoScoreableTokens);
    }
    softmax_in_place(&mut logits);
    Ok(ConfoundDistribution(logits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{LabelSet, Vocabulary};
    use alloc::vec;
    use proptest::prelude::*;

    fn zero_table(words: usize, classes: usize) -> LogOddsTable {
        let vocab = Vocabulary::from_tokens((0..words).map(|i| alloc::format!("w{i}")));
        let labels = LabelSet::new((0..classes).map(|i| alloc::format!("c{i}")).collect());
        let v = vocab.size();
        LogOddsTable::from_scores(labels, &vocab, vec![0.0; classes * v], 10.0).unwrap()
    }

    fn table(scores: Vec<f64>, words: usize) -> LogOddsTable {
        let vocab = Vocabulary::from_tokens((0..words).map(|i| alloc::format!("w{i}")));
        let classes = scores.len() / vocab.size();
        let labels = LabelSet::new((0..classes).map(|i| alloc::format!("c{i}")).collect());
        LogOddsTable::from_scores(labels, &vocab, scores, 10.0).unwrap()
    }

    #[test]
    fn zero_table_gives_uniform_rows_and_docs() {
        let pwy = WordClassDistribution::from_table(&zero_table(5, 3));
        for y in 0..3 {
            for p in pwy.row(y) {
                assert!((p - 1.0 / 8.0).abs() < 1e-15);
            }
        }
        let t = document_confound_distribution(&[3, 4, 4, 7], &pwy).unwrap();
        for p in t.probs() {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn clamped_infinite_score() {
        // columns: pad unk mask w0 w1 w2
        let scores = vec![0.0, 0.0, 0.0, f64::INFINITY, 0.0, 0.0];
        let pwy = WordClassDistribution::from_table(&table(scores, 3));
        let s20 = 1.0 / (1.0 + (-20.0f64).exp());
        let expected = s20 / (s20 + 5.0 * 0.5);
        assert!((pwy.prob(0, 3) - expected).abs() < 1e-12);
    }

    #[test]
    fn single_token_matches_two_line_oracle() {
        let scores = vec![
            0.0, 0.0, 0.0, 1.5, -0.3, //
            0.0, 0.0, 0.0, -1.5, 0.7,
        ];
        let pwy = WordClassDistribution::from_table(&table(scores.clone(), 2));
        let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
        let p = |row: &[f64], w: usize| sig(row[w]) / row.iter().map(|s| sig(*s)).sum::<f64>();
        let (la, lb) = (p(&scores[..5], 3).ln(), p(&scores[5..], 3).ln());
        let ta = la.exp() / (la.exp() + lb.exp());
        let t = document_confound_distribution(&[3], &pwy).unwrap();
        assert!((t.probs()[0] - ta).abs() < 1e-12);
        assert!((t.probs()[1] - (1.0 - ta)).abs() < 1e-12);
    }

    #[test]
    fn pad_and_mask_only_is_an_error() {
        let pwy = WordClassDistribution::from_table(&zero_table(2, 2));
        assert_eq!(
            document_confound_distribution(&[PAD, MASK], &pwy),
            Err(Error::NoScoreableTokens)
        );
        assert!(matches!(
            document_confound_distribution(&[99], &pwy),
            Err(Error::TokenOutOfRange { .. })
        ));
    }

    #[test]
    fn prior_only_when_unbalanced() {
        let pwy = WordClassDistribution::from_table(&zero_table(2, 2));
        assert!(!pwy.clone().with_class_prior(&[1000, 1005]).has_prior());
        let skewed = pwy.with_class_prior(&[300, 100]);
        assert!(skewed.has_prior());
        let t = document_confound_distribution(&[3], &skewed).unwrap();
        assert!((t.probs()[0] - 0.75).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn rows_normalized(scores in proptest::collection::vec(-30.0f64..30.0, 3 * 9)) {
            let pwy = WordClassDistribution::from_table(&table(scores, 6));
            for y in 0..3 {
                let s: f64 = pwy.row(y).iter().sum();
                prop_assert!((s - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn order_invariant_and_doubling_sharpens(
            scores in proptest::collection::vec(-5.0f64..5.0, 4 * 10),
            doc in proptest::collection::vec(3u32..10, 1..30),
        ) {
            let pwy = WordClassDistribution::from_table(&table(scores, 7));
            let t = document_confound_distribution(&doc, &pwy).unwrap();
            prop_assert!((t.probs().iter().sum::<f64>() - 1.0).abs() < 1e-6);
            let mut rev = doc.clone();
            rev.reverse();
            let tr = document_confound_distribution(&rev, &pwy).unwrap();
            for (a, b) in t.probs().iter().zip(tr.probs()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            let doubled: Vec<u32> = doc.iter().chain(doc.iter()).copied().collect();
            let td = document_confound_distribution(&doubled, &pwy).unwrap();
            prop_assert!(td.entropy() <= t.entropy() + 1e-12);
        }
    }
}
