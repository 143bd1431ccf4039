use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::document::{Document, Domain};
use crate::error::{Error, Result};

/// Parameters of the synthetic confounded corpus.
///
/// Every class owns a disjoint set of style words (emitted in both domains)
/// and a disjoint set of topic words (emitted with domain-dependent
/// probability). Everything else is drawn from a shared filler vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub num_classes: usize,
    pub style_words_per_class: usize,
    pub topic_words_per_class: usize,
    pub filler_vocab_size: usize,
    pub doc_length: (usize, usize),
    pub style_strength: f64,
    pub topic_strength_in: f64,
    pub topic_strength_out: f64,
    pub docs_per_class_per_domain: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            num_classes: 4,
            style_words_per_class: 20,
            topic_words_per_class: 5,
            filler_vocab_size: 2000,
            doc_length: (60, 120),
            style_strength: 0.15,
            topic_strength_in: 0.15,
            topic_strength_out: 0.0,
            docs_per_class_per_domain: 500,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticWordKind {
    Style(usize),
    Topic(usize),
    Filler,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if self.num_classes < 2 {
            return Err(Error::InvalidConfig(
                "num_classes must be at least 2".into(),
            ));
        }
        if ![
            self.style_strength,
            self.topic_strength_in,
            self.topic_strength_out,
        ]
        .into_iter()
        .all(prob)
        {
            return Err(Error::InvalidConfig(
                "strengths must be probabilities".into(),
            ));
        }
        if self.topic_strength_out >= self.topic_strength_in && self.topic_strength_in > 0.0 {
            return Err(Error::InvalidConfig(
                "topic_strength_out must be < topic_strength_in".into(),
            ));
        }
        if self.style_strength + self.topic_strength_in > 1.0 {
            return Err(Error::InvalidConfig(
                "style + topic strength exceeds 1".into(),
            ));
        }
        let (lo, hi) = self.doc_length;
        if lo == 0 || lo > hi {
            return Err(Error::InvalidConfig(
                "doc_length must satisfy 1 <= min <= max".into(),
            ));
        }
        let min_total = self.style_strength + self.topic_strength_out.min(self.topic_strength_in);
        if self.filler_vocab_size == 0 && min_total < 1.0 {
            return Err(Error::InvalidConfig(
                "filler_vocab_size = 0 but strengths leave filler positions".into(),
            ));
        }
        if self.style_strength > 0.0 && self.style_words_per_class == 0 {
            return Err(Error::InvalidConfig(
                "style_strength > 0 needs style words".into(),
            ));
        }
        if self.topic_strength_in > 0.0 && self.topic_words_per_class == 0 {
            return Err(Error::InvalidConfig(
                "topic_strength_in > 0 needs topic words".into(),
            ));
        }
        Ok(())
    }

    pub fn class_name(&self, y: usize) -> String {
        format!("c{y}")
    }

    pub fn style_word(&self, y: usize, i: usize) -> String {
        format!("sty{y}w{i}")
    }

    pub fn topic_word(&self, y: usize, i: usize) -> String {
        format!("top{y}w{i}")
    }

    pub fn filler_word(&self, i: usize) -> String {
        format!("fil{i}")
    }

    /// The planted topic words of every class (the union of all T_y).
    pub fn topic_words(&self) -> BTreeSet<String> {
        (0..self.num_classes)
            .flat_map(|y| (0..self.topic_words_per_class).map(move |i| (y, i)))
            .map(|(y, i)| self.topic_word(y, i))
            .collect()
    }

    pub fn style_words(&self, y: usize) -> BTreeSet<String> {
        (0..self.style_words_per_class)
            .map(|i| self.style_word(y, i))
            .collect()
    }

    pub fn word_kind(&self, token: &str) -> Option<SyntheticWordKind> {
        let parse = |rest: &str| -> Option<(usize, usize)> {
            let (y, i) = rest.split_once('w')?;
            Some((y.parse().ok()?, i.parse().ok()?))
        };
        if let Some((y, i)) = token.strip_prefix("sty").and_then(parse) {
            (y < self.num_classes && i < self.style_words_per_class)
                .then_some(SyntheticWordKind::Style(y))
        } else if let Some((y, i)) = token.strip_prefix("top").and_then(parse) {
            (y < self.num_classes && i < self.topic_words_per_class)
                .then_some(SyntheticWordKind::Topic(y))
        } else {
            let i: usize = token.strip_prefix("fil")?.parse().ok()?;
            (i < self.filler_vocab_size).then_some(SyntheticWordKind::Filler)
        }
    }
}

/// Generates the corpus: for each domain, for each class, the configured
/// number of documents, in that order. Deterministic given `spec.seed`.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<Vec<Document>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut docs = Vec::with_capacity(2 * spec.num_classes * spec.docs_per_class_per_domain);
    for domain in [Domain::In, Domain::Out] {
        let topic_p = match domain {
            Domain::In => spec.topic_strength_in,
            Domain::Out => spec.topic_strength_out,
        };
        for y in 0..spec.num_classes {
            for _ in 0..spec.docs_per_class_per_domain {
                let len = rng.gen_range(spec.doc_length.0..=spec.doc_length.1);
                let mut tokens = Vec::with_capacity(len);
                for _ in 0..len {
                    let u: f64 = rng.gen();
                    let tok = if u < spec.style_strength {
                        spec.style_word(y, rng.gen_range(0..spec.style_words_per_class))
                    } else if u < spec.style_strength + topic_p {
                        spec.topic_word(y, rng.gen_range(0..spec.topic_words_per_class))
                    } else {
                        spec.filler_word(rng.gen_range(0..spec.filler_vocab_size))
                    };
                    tokens.push(tok);
                }
                docs.push(Document::new(tokens, spec.class_name(y), domain)?);
            }
        }
    }
    Ok(docs)
}
