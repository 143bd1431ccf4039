//! Attention and saliency lexicons: word types ranked by their mean
//! per-occurrence score over a test set.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::corpus::{EncodedDocument, Vocabulary, RESERVED};
use crate::error::{Error, Result};
use crate::model::{saliency_map, Network};

pub const DEFAULT_MIN_COUNT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LexiconMethod {
    Attention,
    Saliency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub word: String,
    pub mean_score: f64,
    pub count: usize,
}

/// Entries sorted by mean score descending, ties by word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexiconReport {
    pub method: LexiconMethod,
    pub top_k: usize,
    pub min_count: usize,
    pub entries: Vec<LexiconEntry>,
}

impl LexiconReport {
    pub fn words(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.word.as_str()).collect()
    }
}

/// Per-word sums and counts of token scores.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LexiconAccumulator {
    totals: BTreeMap<u32, (f64, usize)>,
}

impl LexiconAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_document(&mut self, ids: &[u32], scores: &[f64]) {
        for (&id, &s) in ids.iter().zip(scores) {
            let e = self.totals.entry(id).or_insert((0.0, 0));
            e.0 += s;
            e.1 += 1;
        }
    }

    pub fn merge(&mut self, other: &LexiconAccumulator) {
        for (id, (s, c)) in &other.totals {
            let e = self.totals.entry(*id).or_insert((0.0, 0));
            e.0 += s;
            e.1 += c;
        }
    }

    /// Sum of scores and number of occurrences of `id`.
    pub fn total(&self, id: u32) -> Option<(f64, usize)> {
        self.totals.get(&id).copied()
    }

    /// Mean score over every accumulated occurrence, reserved ids included.
    pub fn global_mean(&self) -> f64 {
        let (s, c) = self
            .totals
            .values()
            .fold((0.0, 0usize), |(s, c), (ts, tc)| (s + ts, c + tc));
        if c == 0 {
            0.0
        } else {
            s / c as f64
        }
    }

    /// Top `top_k` non-reserved words with at least `min_count` occurrences.
    pub fn report(
        &self,
        vocab: &Vocabulary,
        method: LexiconMethod,
        top_k: usize,
        min_count: usize,
    ) -> LexiconReport {
        let mut entries: Vec<LexiconEntry> = self
            .totals
            .iter()
            .filter(|(id, (_, c))| **id as usize >= RESERVED && *c >= min_count.max(1))
            .filter_map(|(id, (s, c))| {
                vocab.token_of(*id).map(|w| LexiconEntry {
                    word: w.into(),
                    mean_score: s / *c as f64,
                    count: *c,
                })
            })
            .collect();
        entries.sort_by(|a, b| {
            b.mean_score
                .total_cmp(&a.mean_score)
                .then_with(|| a.word.cmp(&b.word))
        });
        entries.truncate(top_k);
        LexiconReport {
            method,
            top_k,
            min_count,
            entries,
        }
    }
}

fn build<F>(docs: &[EncodedDocument], score: F) -> Result<LexiconAccumulator>
where
    F: Fn(&[u32]) -> Result<Vec<f64>> + Sync + Send,
{
    if docs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let per_doc = crate::training::map_docs(docs, |d| score(&d.ids))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut acc = LexiconAccumulator::new();
    for (d, s) in docs.iter().zip(&per_doc) {
        acc.add_document(&d.ids, s);
    }
    Ok(acc)
}

/// Per-occurrence attention accumulators over `docs`.
pub fn attention_scores(net: &Network, docs: &[EncodedDocument]) -> Result<LexiconAccumulator> {
    build(docs, |ids| net.encode(ids).map(|(_, att)| att))
}

/// Per-occurrence saliency accumulators over `docs`.
pub fn saliency_scores(net: &Network, docs: &[EncodedDocument]) -> Result<LexiconAccumulator> {
    build(docs, |ids| saliency_map(ids, &net.encoder, &net.classifier))
}

/// Words ranked by mean attention weight per occurrence.
pub fn attention_lexicon(
    net: &Network,
    vocab: &Vocabulary,
    docs: &[EncodedDocument],
    top_k: usize,
    min_count: usize,
) -> Result<LexiconReport> {
    Ok(attention_scores(net, docs)?.report(vocab, LexiconMethod::Attention, top_k, min_count))
}

/// Words ranked by mean saliency per occurrence.
pub fn saliency_lexicon(
    net: &Network,
    vocab: &Vocabulary,
    docs: &[EncodedDocument],
    top_k: usize,
    min_count: usize,
) -> Result<LexiconReport> {
    Ok(saliency_scores(net, docs)?.report(vocab, LexiconMethod::Saliency, top_k, min_count))
}
