//! Accuracy reports on in-domain and out-of-domain test sets, masked-test
//! evaluation and prompt-holdout configurations.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::confounds::LogOddsTable;
use crate::corpus::{mask_top_k, Document, LabelSet, Vocabulary, MAX_SEQUENCE_LEN};
use crate::error::{Error, Result};
use crate::model::Network;
use crate::training::LinearModel;

/// A trained classifier over raw documents. Ties at the argmax go to the
/// lowest class index.
pub trait Predictor: Sync {
    fn classes(&self) -> &LabelSet;
    fn predict(&self, doc: &Document) -> Result<usize>;
}

/// A network together with the vocabulary it was trained on.
#[derive(Debug, Clone, Copy)]
pub struct NeuralPredictor<'a> {
    pub network: &'a Network,
    pub vocab: &'a Vocabulary,
    pub classes: &'a LabelSet,
}

impl Predictor for NeuralPredictor<'_> {
    fn classes(&self) -> &LabelSet {
        self.classes
    }

    fn predict(&self, doc: &Document) -> Result<usize> {
        let mut ids = self.vocab.encode(&doc.tokens);
        ids.truncate(MAX_SEQUENCE_LEN);
        self.network.predict(&ids)
    }
}

impl Predictor for LinearModel {
    fn classes(&self) -> &LabelSet {
        &self.classes
    }

    fn predict(&self, doc: &Document) -> Result<usize> {
        Ok(LinearModel::predict(self, doc))
    }
}

/// Metrics of one test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics {
    pub accuracy: f64,
    pub num_examples: usize,
    /// Classes without examples are absent.
    pub per_class_accuracy: BTreeMap<String, f64>,
    /// `confusion[gold][predicted]`.
    pub confusion: Vec<Vec<usize>>,
}

impl SplitMetrics {
    fn from_pairs(classes: &LabelSet, pairs: &[(usize, usize)]) -> Self {
        let m = classes.len();
        let mut confusion = vec![vec![0usize; m]; m];
        for &(gold, pred) in pairs {
            confusion[gold][pred] += 1;
        }
        let correct: usize = (0..m).map(|i| confusion[i][i]).sum();
        let per_class_accuracy = (0..m)
            .filter_map(|i| {
                let n: usize = confusion[i].iter().sum();
                (n > 0).then(|| {
                    (
                        String::from(classes.name(i)),
                        confusion[i][i] as f64 / n as f64,
                    )
                })
            })
            .collect();
        SplitMetrics {
            accuracy: correct as f64 / pairs.len() as f64,
            num_examples: pairs.len(),
            per_class_accuracy,
            confusion,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classes: Vec<String>,
    pub in_domain: Option<SplitMetrics>,
    pub out_domain: Option<SplitMetrics>,
    pub mask_k: Option<usize>,
    pub warnings: Vec<String>,
}

impl EvalReport {
    pub fn accuracy_in(&self) -> Option<f64> {
        self.in_domain.as_ref().map(|s| s.accuracy)
    }

    pub fn accuracy_out(&self) -> Option<f64> {
        self.out_domain.as_ref().map(|s| s.accuracy)
    }
}

fn score_split(model: &dyn Predictor, docs: &[Document]) -> Result<SplitMetrics> {
    let classes = model.classes();
    let pairs = crate::training::map_docs(docs, |d| -> Result<(usize, usize)> {
        Ok((classes.index_of(&d.label)?, model.predict(d)?))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(SplitMetrics::from_pairs(classes, &pairs))
}

/// Argmax accuracy, per-class accuracy and confusion matrix per split. An
/// empty split leaves its metrics absent and adds a warning.
pub fn evaluate_accuracy(
    model: &dyn Predictor,
    test_in: &[Document],
    test_out: &[Document],
) -> Result<EvalReport> {
    let mut warnings = Vec::new();
    let mut split = |docs: &[Document], name: &str| -> Result<Option<SplitMetrics>> {
        if docs.is_empty() {
            warnings.push(format!("{name}-domain test set is empty"));
            Ok(None)
        } else {
            score_split(model, docs).map(Some)
        }
    };
    let in_domain = split(test_in, "in")?;
    let out_domain = split(test_out, "out")?;
    Ok(EvalReport {
        classes: model.classes().names().to_vec(),
        in_domain,
        out_domain,
        mask_k: None,
        warnings,
    })
}

/// Evaluates on test copies in which the top-`k` log-odds words of every
/// class are replaced by the mask token, once per `k`. The model is not
/// retrained.
pub fn masked_evaluation(
    model: &dyn Predictor,
    table: &LogOddsTable,
    test_in: &[Document],
    test_out: &[Document],
    ks: &[usize],
) -> Result<Vec<EvalReport>> {
    ks.iter()
        .map(|&k| {
            let mi: Vec<Document> = test_in.iter().map(|d| mask_top_k(d, table, k)).collect();
            let mo: Vec<Document> = test_out.iter().map(|d| mask_top_k(d, table, k)).collect();
            let mut r = evaluate_accuracy(model, &mi, &mo)?;
            r.mask_k = Some(k);
            Ok(r)
        })
        .collect()
}

/// One held-out-prompt configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptHoldout {
    pub prompt: String,
    pub train: Vec<Document>,
    pub dev: Vec<Document>,
    pub test_out: Vec<Document>,
}

/// Distinct prompt ids across the documents.
pub fn prompts(docs: &[Document]) -> BTreeSet<String> {
    docs.iter().filter_map(|d| d.prompt.clone()).collect()
}

/// Removes documents with `prompt` from train and dev; the removed dev
/// documents become the out-of-domain test set.
pub fn prompt_holdout_splits(
    train: &[Document],
    dev: &[Document],
    prompt: &str,
) -> Result<PromptHoldout> {
    let has = |d: &Document| d.prompt.as_deref() == Some(prompt);
    if !train.iter().chain(dev).any(has) {
        return Err(Error::UnknownPrompt(prompt.into()));
    }
    Ok(PromptHoldout {
        prompt: prompt.into(),
        train: train.iter().filter(|d| !has(d)).cloned().collect(),
        dev: dev.iter().filter(|d| !has(d)).cloned().collect(),
        test_out: dev.iter().filter(|d| has(d)).cloned().collect(),
    })
}

/// Unweighted mean of the out-of-domain accuracies of several reports.
pub fn mean_out_of_domain(reports: &[EvalReport]) -> Option<f64> {
    let accs: Vec<f64> = reports
        .iter()
        .filter_map(EvalReport::accuracy_out)
        .collect();
    (!accs.is_empty()).then(|| accs.iter().sum::<f64>() / accs.len() as f64)
}
