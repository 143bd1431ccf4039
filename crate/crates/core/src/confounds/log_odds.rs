use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::corpus::{EncodedDocument, LabelSet, Vocabulary, RESERVED};
use crate::error::{Error, Result};
use crate::math::{ln, sqrt};

/// Scores are clamped to this magnitude before the sigmoid.
pub const SCORE_CLAMP: f64 = 20.0;

/// z-scored log-odds `lo(w, y)` for every class and vocabulary id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogOddsTable {
    classes: LabelSet,
    words: Vec<String>,
    /// Row-major `[class][word id]`.
    scores: Vec<f64>,
    alpha0: f64,
}

/// One-vs-rest log-odds ratio with informative Dirichlet prior.
///
/// For word `w` and class `y`, with `a_w = alpha0 * count(w) / N`:
///
/// ```text
/// delta = ln((f_y + a_w) / (n_y + alpha0 - f_y - a_w))
///       - ln((f_r + a_w) / (n_r + alpha0 - f_r - a_w))
/// var   = 1 / (f_y + a_w) + 1 / (f_r + a_w)
/// lo    = delta / sqrt(var)
/// ```
///
/// where `r` denotes the rest of the corpus. Ids never observed in `train`
/// (the reserved ids, usually) score zero.
pub fn compute_log_odds(
    train: &[EncodedDocument],
    vocab: &Vocabulary,
    classes: &LabelSet,
    alpha0: f64,
) -> Result<LogOddsTable> {
    if !(alpha0 > 0.0) || !alpha0.is_finite() {
        return Err(Error::InvalidConfig("alpha0 must be positive".into()));
    }
    if train.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let m = classes.len();
    let v = vocab.size();
    let mut counts = vec![0.0f64; m * v];
    let mut docs_per_class = vec![0usize; m];
    for doc in train {
        if doc.label >= m {
            return Err(Error::UnknownClass(alloc::format!("#{}", doc.label)));
        }
        docs_per_class[doc.label] += 1;
        for &id in &doc.ids {
            let id = id as usize;
            if id >= v {
                return Err(Error::TokenOutOfRange {
                    id: id as u32,
                    size: v,
                });
            }
            counts[doc.label * v + id] += 1.0;
        }
    }
    if let Some(y) = docs_per_class.iter().position(|&n| n == 0) {
        return Err(Error::EmptyClass(classes.name(y).into()));
    }
    let background: Vec<f64> = (0..v)
        .map(|w| (0..m).map(|y| counts[y * v + w]).sum())
        .collect();
    let total: f64 = background.iter().sum();
    let class_totals: Vec<f64> = (0..m)
        .map(|y| counts[y * v..(y + 1) * v].iter().sum())
        .collect();

    let mut scores = vec![0.0; m * v];
    for w in 0..v {
        if background[w] == 0.0 {
            continue;
        }
        let a_w = alpha0 * background[w] / total;
        for y in 0..m {
            let f_y = counts[y * v + w];
            let f_r = background[w] - f_y;
            let n_y = class_totals[y];
            let n_r = total - n_y;
            let den_y = n_y + alpha0 - f_y - a_w;
            let den_r = n_r + alpha0 - f_r - a_w;
            if den_y <= 0.0 || den_r <= 0.0 {
                // only possible for a single-word vocabulary
                continue;
            }
            let delta = ln((f_y + a_w) / den_y) - ln((f_r + a_w) / den_r);
            let var = 1.0 / (f_y + a_w) + 1.0 / (f_r + a_w);
            scores[y * v + w] = delta / sqrt(var);
        }
    }
    Ok(LogOddsTable {
        classes: classes.clone(),
        words: vocab.all_tokens().to_vec(),
        scores,
        alpha0,
    })
}

impl LogOddsTable {
    /// Table from precomputed scores, row-major `[class][vocab id]`.
    pub fn from_scores(
        classes: LabelSet,
        vocab: &Vocabulary,
        scores: Vec<f64>,
        alpha0: f64,
    ) -> Result<Self> {
        let expected = classes.len() * vocab.size();
        if scores.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: scores.len(),
            });
        }
        Ok(LogOddsTable {
            classes,
            words: vocab.all_tokens().to_vec(),
            scores,
            alpha0,
        })
    }

    pub fn classes(&self) -> &LabelSet {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    /// Number of columns (vocabulary size including reserved ids).
    pub fn vocab_size(&self) -> usize {
        self.words.len()
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn score(&self, class: usize, id: u32) -> f64 {
        self.scores[class * self.words.len() + id as usize]
    }

    pub fn row(&self, class: usize) -> &[f64] {
        let v = self.words.len();
        &self.scores[class * v..(class + 1) * v]
    }

    /// Ids of the `k` highest-scoring non-reserved words for class index `y`,
    /// descending; ties broken lexicographically by word.
    pub fn top_k_ids(&self, y: usize, k: usize) -> Vec<u32> {
        let row = self.row(y);
        let mut ids: Vec<u32> = (RESERVED as u32..self.words.len() as u32).collect();
        ids.sort_by(|&a, &b| {
            row[b as usize]
                .total_cmp(&row[a as usize])
                .then_with(|| self.words[a as usize].cmp(&self.words[b as usize]))
        });
        ids.truncate(k);
        ids
    }

    /// The `k` words most associated with `class`.
    pub fn top_k_words(&self, class: &str, k: usize) -> Result<Vec<String>> {
        let y = self.classes.index_of(class)?;
        Ok(self
            .top_k_ids(y, k)
            .into_iter()
            .map(|id| self.words[id as usize].clone())
            .collect())
    }

    /// `(word, class, score)` rows sorted by class, then descending score.
    pub fn export_rows(&self) -> Vec<(&str, &str, f64)> {
        let mut rows = Vec::new();
        for y in 0..self.num_classes() {
            for id in self.top_k_ids(y, self.words.len()) {
                rows.push((self.word(id), self.classes.name(y), self.score(y, id)));
            }
        }
        rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tokenize, Document, Domain};
    use alloc::string::ToString;

    /// Scalar evaluation of the formula for one (word, class) pair.
    fn oracle(f_y: f64, f_r: f64, n_y: f64, n_r: f64, alpha0: f64) -> f64 {
        let a = alpha0 * (f_y + f_r) / (n_y + n_r);
        let d = ((f_y + a) / (n_y + alpha0 - f_y - a)).ln()
            - ((f_r + a) / (n_r + alpha0 - f_r - a)).ln();
        d / (1.0 / (f_y + a) + 1.0 / (f_r + a)).sqrt()
    }

    fn fixture(texts: &[(&str, &str)]) -> (Vec<EncodedDocument>, Vocabulary, LabelSet) {
        let docs: Vec<Document> = texts
            .iter()
            .map(|(t, l)| Document::new(tokenize(t), *l, Domain::In).unwrap())
            .collect();
        let vocab = Vocabulary::build(&docs, 100).unwrap();
        let labels = LabelSet::from_documents(&docs);
        let enc = vocab.encode_corpus(&docs, &labels).unwrap();
        (enc, vocab, labels)
    }

    #[test]
    fn identical_distributions_score_zero() {
        let (enc, vocab, labels) = fixture(&[("x y", "a"), ("x y", "b")]);
        let t = compute_log_odds(&enc, &vocab, &labels, 10.0).unwrap();
        for y in 0..2 {
            for id in 0..vocab.size() as u32 {
                assert!(t.score(y, id).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mirrored_corpus_matches_scalar_oracle() {
        let (enc, vocab, labels) = fixture(&[("x x y", "a"), ("y y x", "b")]);
        let t = compute_log_odds(&enc, &vocab, &labels, 10.0).unwrap();
        let (x, y) = (vocab.id_of("x"), vocab.id_of("y"));
        let expected_x_a = oracle(2.0, 1.0, 3.0, 3.0, 10.0);
        assert!((t.score(0, x) - expected_x_a).abs() < 1e-12);
        assert!(t.score(0, x) > 0.0);
        assert!(t.score(0, y) < 0.0);
        assert!((t.score(0, x) - t.score(1, y)).abs() < 1e-12);
        assert_eq!(t.top_k_words("a", 1).unwrap(), ["x"]);
        assert_eq!(t.top_k_words("b", 1).unwrap(), ["y"]);
    }

    #[test]
    fn exclusive_word_tops_its_class() {
        let (enc, vocab, labels) = fixture(&[
            ("finland is cold finland sauna the a", "finnish"),
            ("the a is paris france a the", "french"),
            ("finland helsinki is the a", "finnish"),
            ("paris is nice the a", "french"),
        ]);
        let t = compute_log_odds(&enc, &vocab, &labels, 10.0).unwrap();
        assert_eq!(t.top_k_words("finnish", 1).unwrap(), ["finland"]);
        assert_eq!(t.top_k_words("french", 1).unwrap(), ["paris"]);
    }

    #[test]
    fn top_k_edge_cases() {
        let vocab = Vocabulary::from_tokens(["c", "b", "a"]);
        let labels = LabelSet::new(alloc::vec!["p".into(), "q".into()]);
        let t = LogOddsTable::from_scores(labels, &vocab, vec![0.0; 12], 10.0).unwrap();
        assert!(t.top_k_words("p", 0).unwrap().is_empty());
        assert_eq!(t.top_k_words("p", 2).unwrap(), ["a", "b"]);
        assert_eq!(
            t.top_k_words("zz", 2),
            Err(Error::UnknownClass("zz".to_string()))
        );
    }

    #[test]
    fn rejects_bad_alpha_and_missing_class() {
        let (enc, vocab, labels) = fixture(&[("x", "a"), ("y", "b")]);
        assert!(compute_log_odds(&enc, &vocab, &labels, 0.0).is_err());
        assert!(compute_log_odds(&enc, &vocab, &labels, -1.0).is_err());
        let only_a: Vec<_> = enc.into_iter().filter(|d| d.label == 0).collect();
        assert_eq!(
            compute_log_odds(&only_a, &vocab, &labels, 1.0),
            Err(Error::EmptyClass("b".into()))
        );
    }

    #[test]
    fn export_sorted_by_class_then_score() {
        let (enc, vocab, labels) = fixture(&[("x x y z", "a"), ("y y x", "b")]);
        let t = compute_log_odds(&enc, &vocab, &labels, 10.0).unwrap();
        let rows = t.export_rows();
        assert_eq!(rows.len(), 2 * (vocab.size() - RESERVED));
        for pair in rows.windows(2) {
            if pair[0].1 == pair[1].1 {
                assert!(pair[0].2 >= pair[1].2);
            } else {
                assert!(pair[0].1 < pair[1].1);
            }
        }
    }
}
