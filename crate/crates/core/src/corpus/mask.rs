use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::document::Document;
use super::vocab::{MASK, MASK_TOKEN};
use crate::confounds::LogOddsTable;

/// Union over classes of the top-`k` words by log-odds score.
pub fn masked_words(table: &LogOddsTable, k: usize) -> BTreeSet<String> {
    masked_word_ids(table, k)
        .into_iter()
        .map(|id| table.word(id).to_string())
        .collect()
}

/// Ids (in the table's vocabulary) of [`masked_words`].
pub fn masked_word_ids(table: &LogOddsTable, k: usize) -> BTreeSet<u32> {
    (0..table.num_classes())
        .flat_map(|y| table.top_k_ids(y, k))
        .collect()
}

/// Replaces every top-`k` word of any class by the MASK token.
pub fn mask_top_k(doc: &Document, table: &LogOddsTable, k: usize) -> Document {
    if k == 0 {
        return doc.clone();
    }
    let words = masked_words(table, k);
    let mut out = doc.clone();
    for t in out.tokens.iter_mut() {
        if words.contains(t.as_str()) {
            *t = MASK_TOKEN.to_string();
        }
    }
    out
}

/// Id-level masking for already-encoded sequences.
pub fn mask_ids(ids: &[u32], masked: &BTreeSet<u32>) -> Vec<u32> {
    ids.iter()
        .map(|id| if masked.contains(id) { MASK } else { *id })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Domain, LabelSet, Vocabulary};
    use alloc::vec;

    fn table() -> LogOddsTable {
        let vocab = Vocabulary::from_tokens(["cold", "finland", "is", "paris"]);
        let classes = LabelSet::new(vec!["finnish".into(), "french".into()]);
        // columns: pad unk mask cold finland is paris
        let scores = vec![
            0.0, 0.0, 0.0, 0.5, 9.0, 0.0, -9.0, //
            0.0, 0.0, 0.0, -0.5, -9.0, 0.0, 9.0,
        ];
        LogOddsTable::from_scores(classes, &vocab, scores, 10.0).unwrap()
    }

    fn doc(words: &[&str]) -> Document {
        Document::new(
            words.iter().map(|s| s.to_string()).collect(),
            "finnish",
            Domain::In,
        )
        .unwrap()
    }

    #[test]
    fn k_zero_is_identity() {
        let d = doc(&["finland", "is", "cold"]);
        assert_eq!(mask_top_k(&d, &table(), 0), d);
    }

    #[test]
    fn masks_top_word() {
        let d = doc(&["finland", "is", "cold"]);
        let m = mask_top_k(&d, &table(), 1);
        assert_eq!(m.tokens, [MASK_TOKEN, "is", "cold"]);
        assert_eq!(m.label, d.label);
        assert_eq!(m.domain, d.domain);
    }

    #[test]
    fn disjoint_support_unchanged() {
        let d = doc(&["is", "cold"]);
        assert_eq!(mask_top_k(&d, &table(), 1), d);
    }

    #[test]
    fn idempotent() {
        let t = table();
        let d = doc(&["finland", "paris", "is", "cold", "finland"]);
        for k in 0..5 {
            let once = mask_top_k(&d, &t, k);
            assert_eq!(mask_top_k(&once, &t, k), once);
        }
    }

    #[test]
    fn id_masking() {
        let set: BTreeSet<u32> = [4u32].into_iter().collect();
        assert_eq!(mask_ids(&[4, 5, 4], &set), [MASK, 5, MASK]);
    }
}
