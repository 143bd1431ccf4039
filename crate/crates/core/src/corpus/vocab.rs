use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::document::{Document, EncodedDocument, LabelSet};
use super::MAX_SEQUENCE_LEN;
use crate::error::{Error, Result};

pub const PAD: u32 = 0;
pub const UNK: u32 = 1;
pub const MASK: u32 = 2;
pub const RESERVED: usize = 3;

pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";
pub const MASK_TOKEN: &str = "<mask>";

/// Bidirectional token <-> id map. Ids 0..3 are PAD, UNK and MASK.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "VocabRepr", into = "VocabRepr")]
pub struct Vocabulary {
    tokens: Vec<String>,
    ids: BTreeMap<String, u32>,
}

#[derive(Serialize, Deserialize)]
struct VocabRepr {
    tokens: Vec<String>,
}

impl From<VocabRepr> for Vocabulary {
    fn from(r: VocabRepr) -> Self {
        Vocabulary::from_tokens(r.tokens.into_iter().skip(RESERVED))
    }
}

impl From<Vocabulary> for VocabRepr {
    fn from(v: Vocabulary) -> Self {
        VocabRepr { tokens: v.tokens }
    }
}

impl Vocabulary {
    /// Keeps the `max_size` most frequent tokens; ties are broken lexicographically.
    pub fn build(corpus: &[Document], max_size: usize) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if max_size == 0 {
            return Err(Error::InvalidConfig("max_size must be at least 1".into()));
        }
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in corpus {
            for t in &doc.tokens {
                if !is_reserved_token(t) {
                    *counts.entry(t.as_str()).or_default() += 1;
                }
            }
        }
        let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
        // BTreeMap order is lexicographic, so a stable sort by count keeps the tie-break.
        ranked.sort_by(|a, b| b.1.cmp(&a.1));
        ranked.truncate(max_size);
        Ok(Self::from_tokens(
            ranked.into_iter().map(|(t, _)| t.to_string()),
        ))
    }

    /// Vocabulary from non-reserved tokens in id order (id = position + 3).
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut v = Vocabulary {
            tokens: [PAD_TOKEN, UNK_TOKEN, MASK_TOKEN]
                .map(String::from)
                .to_vec(),
            ids: BTreeMap::new(),
        };
        for (i, t) in v.tokens.iter().enumerate() {
            v.ids.insert(t.clone(), i as u32);
        }
        for t in tokens {
            let t: String = t.into();
            if !v.ids.contains_key(&t) {
                v.ids.insert(t.clone(), v.tokens.len() as u32);
                v.tokens.push(t);
            }
        }
        v
    }

    /// Total number of ids including the reserved ones.
    pub fn size(&self) -> usize {
        self.tokens.len()
    }

    pub fn id_of(&self, token: &str) -> u32 {
        self.ids.get(token).copied().unwrap_or(UNK)
    }

    pub fn get(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    pub fn token_of(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    /// Non-reserved tokens in id order.
    pub fn words(&self) -> &[String] {
        &self.tokens[RESERVED..]
    }

    pub fn all_tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<u32> {
        tokens.iter().map(|t| self.id_of(t)).collect()
    }

    pub fn decode(&self, ids: &[u32]) -> Vec<String> {
        ids.iter()
            .map(|&i| self.token_of(i).unwrap_or(UNK_TOKEN).to_string())
            .collect()
    }

    /// Encodes a document, truncating to the encoder's maximum length.
    pub fn encode_document(&self, doc: &Document, labels: &LabelSet) -> Result<EncodedDocument> {
        let mut ids = self.encode(&doc.tokens);
        ids.truncate(MAX_SEQUENCE_LEN);
        Ok(EncodedDocument {
            ids,
            label: labels.index_of(&doc.label)?,
            domain: doc.domain,
        })
    }

    pub fn encode_corpus(
        &self,
        docs: &[Document],
        labels: &LabelSet,
    ) -> Result<Vec<EncodedDocument>> {
        docs.iter()
            .map(|d| self.encode_document(d, labels))
            .collect()
    }
}

pub(crate) fn is_reserved_token(t: &str) -> bool {
    t == PAD_TOKEN || t == UNK_TOKEN || t == MASK_TOKEN
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tokenize, Domain};
    use alloc::vec;
    use proptest::prelude::*;

    fn doc(text: &str) -> Document {
        Document::new(tokenize(text), "a", Domain::In).unwrap()
    }

    #[test]
    fn frequency_order() {
        let v = Vocabulary::build(&[doc("a a b")], 1).unwrap();
        assert_eq!(v.words(), ["a"]);
        assert_eq!(v.size(), 4);
        assert_eq!(v.id_of("b"), UNK);
    }

    #[test]
    fn lexicographic_ties() {
        let v = Vocabulary::build(&[doc("b a")], 2).unwrap();
        assert!(v.id_of("a") < v.id_of("b"));
        assert_eq!(v.id_of("a"), 3);
    }

    #[test]
    fn empty_corpus_rejected() {
        assert_eq!(Vocabulary::build(&[], 5), Err(Error::EmptyCorpus));
    }

    #[test]
    fn mask_token_not_counted() {
        let mut d = doc("x y");
        d.tokens.push(MASK_TOKEN.into());
        let v = Vocabulary::build(&[d], 10).unwrap();
        assert_eq!(v.size(), 5);
        assert_eq!(v.id_of(MASK_TOKEN), MASK);
    }

    #[test]
    fn ten_docs_fifty_words() {
        // Brute force oracle: count frequencies and sort by (-count, word).
        let mut docs = vec![];
        for d in 0..10 {
            let toks: Vec<String> = (0..20)
                .map(|i| alloc::format!("w{:02}", (d * 7 + i * i) % 50))
                .collect();
            docs.push(Document::new(toks, "a", Domain::In).unwrap());
        }
        let mut counts = BTreeMap::new();
        for d in &docs {
            for t in &d.tokens {
                *counts.entry(t.clone()).or_insert(0usize) += 1;
            }
        }
        assert!(counts.len() >= 30);
        let mut oracle: Vec<_> = counts.into_iter().collect();
        oracle.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let v = Vocabulary::build(&docs, 30).unwrap();
        assert_eq!(v.size(), 33);
        let expected: Vec<String> = oracle.into_iter().take(30).map(|x| x.0).collect();
        assert_eq!(v.words(), expected.as_slice());
    }

    #[test]
    fn serde_repr_roundtrip() {
        let v = Vocabulary::from_tokens(["x", "y"]);
        let r: VocabRepr = v.clone().into();
        assert_eq!(Vocabulary::from(r), v);
    }

    proptest! {
        #[test]
        fn encode_decode_roundtrip(ids in proptest::collection::vec(0u32..8, 0..40)) {
            let v = Vocabulary::from_tokens(["a", "b", "c", "d", "e"]);
            prop_assert_eq!(v.encode(&v.decode(&ids)), ids);
        }

        #[test]
        fn id_token_inverse(words in proptest::collection::btree_set("[a-z]{1,6}", 1..30)) {
            let v = Vocabulary::from_tokens(words.iter().cloned());
            for id in 0..v.size() as u32 {
                prop_assert_eq!(v.id_of(v.token_of(id).unwrap()), id);
            }
        }
    }
}
