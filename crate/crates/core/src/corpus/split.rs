use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::document::{Document, Domain};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub seed: u64,
    pub dev_fraction: f64,
    pub test_fraction: f64,
    /// Documents with fewer tokens are dropped.
    pub min_tokens: usize,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            seed: 0,
            dev_fraction: 0.1,
            test_fraction: 0.1,
            min_tokens: 50,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = |f: f64| f > 0.0 && f < 1.0;
        if !ok(self.dev_fraction) || !ok(self.test_fraction) {
            return Err(Error::InvalidConfig(
                "split fractions must lie in (0, 1)".into(),
            ));
        }
        if self.dev_fraction + self.test_fraction >= 1.0 {
            return Err(Error::InvalidConfig(
                "dev_fraction + test_fraction must be < 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Splits {
    pub train: Vec<Document>,
    pub dev: Vec<Document>,
    pub test_in: Vec<Document>,
    pub test_out: Vec<Document>,
}

/// Length filter, class balancing and stratified train/dev/test split.
///
/// Out-of-domain documents go to `test_out` only. In-domain classes are
/// downsampled to the smallest class so every split is label-balanced.
pub fn split_corpus(corpus: &[Document], spec: &SplitSpec) -> Result<Splits> {
    spec.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut by_class: BTreeMap<&str, Vec<&Document>> = BTreeMap::new();
    let mut test_out = Vec::new();
    for doc in corpus {
        let bucket = by_class.entry(doc.label.as_str()).or_default();
        if doc.len() < spec.min_tokens {
            continue;
        }
        match doc.domain {
            Domain::In => bucket.push(doc),
            Domain::Out => test_out.push(doc.clone()),
        }
    }
    if let Some((name, _)) = by_class.iter().find(|(_, docs)| docs.is_empty()) {
        return Err(Error::EmptyClass(name.to_string()));
    }
    let per_class = by_class.values().map(Vec::len).min().unwrap_or(0);
    let n_dev = round(per_class as f64 * spec.dev_fraction);
    let n_test = round(per_class as f64 * spec.test_fraction);
    if n_dev + n_test >= per_class {
        let name: String = by_class
            .keys()
            .next()
            .map(|s| s.to_string())
            .unwrap_or_default();
        return Err(Error::InvalidConfig(alloc::format!(
            "class {name:?} has {per_class} documents, too few for the requested fractions"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut splits = Splits {
        test_out,
        ..Splits::default()
    };
    for docs in by_class.values_mut() {
        docs.shuffle(&mut rng);
        docs.truncate(per_class);
        splits
            .dev
            .extend(docs[..n_dev].iter().map(|d| (*d).clone()));
        splits
            .test_in
            .extend(docs[n_dev..n_dev + n_test].iter().map(|d| (*d).clone()));
        splits
            .train
            .extend(docs[n_dev + n_test..].iter().map(|d| (*d).clone()));
    }
    Ok(splits)
}

fn round(x: f64) -> usize {
    libm::round(x) as usize
}
