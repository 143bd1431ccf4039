//! Text file formats: JSON-lines corpora, vocabulary lists, log-odds and
//! lexicon tables, confound exports, reports and training logs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use deconfound_core::analyze::LexiconReport;
use deconfound_core::confounds::{ConfoundDistribution, LogOddsTable};
use deconfound_core::corpus::{tokenize, Document, Domain, LabelSet, Vocabulary, RESERVED};
use deconfound_core::evaluate::{EvalReport, SplitMetrics};
use deconfound_core::training::LogRecord;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes `contents`, creating parent directories.
pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// One corpus line: either pre-tokenized `tokens` or raw `text`.
#[derive(Debug, Deserialize)]
struct CorpusLine {
    tokens: Option<Vec<String>>,
    text: Option<String>,
    label: String,
    #[serde(default)]
    domain: Domain,
    prompt: Option<String>,
    pos: Option<Vec<String>>,
}

fn parse_corpus_line(line: &str) -> std::result::Result<Document, String> {
    let raw: CorpusLine = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let tokens = match (raw.tokens, raw.text) {
        (Some(t), _) => t,
        (None, Some(text)) => tokenize(&text),
        (None, None) => return Err("line has neither \"tokens\" nor \"text\"".into()),
    };
    let doc = Document {
        tokens,
        label: raw.label,
        domain: raw.domain,
        prompt: raw.prompt,
        pos: raw.pos,
    };
    doc.validate().map_err(|e| e.to_string())?;
    Ok(doc)
}

/// Reads a JSON-lines corpus. Blank lines are skipped.
pub fn read_corpus(path: &Path) -> Result<Vec<Document>> {
    let text = read_text(path)?;
    let mut docs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        docs.push(parse_corpus_line(line).map_err(|m| Error::parse(path, i + 1, m))?);
    }
    Ok(docs)
}

pub fn write_corpus(path: &Path, docs: &[Document]) -> Result<()> {
    write_jsonl(path, docs)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).map_err(|e| Error::Invalid(e.to_string()))?);
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    read_text(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::parse(path, i + 1, e)))
        .collect()
}

/// Vocabulary file: one token per line in id order, reserved tokens first.
pub fn write_vocab(path: &Path, vocab: &Vocabulary) -> Result<()> {
    let mut out = vocab.all_tokens().join("\n");
    out.push('\n');
    write_text(path, &out)
}

pub fn read_vocab(path: &Path) -> Result<Vocabulary> {
    let text = read_text(path)?;
    let tokens: Vec<&str> = text.lines().collect();
    let reference = Vocabulary::from_tokens(std::iter::empty::<String>());
    if tokens.len() < RESERVED
        || tokens[..RESERVED]
            != reference
                .all_tokens()
                .iter()
                .map(String::as_str)
                .collect::<Vec<_>>()[..]
    {
        return Err(Error::parse(
            path,
            1,
            "vocabulary must start with the reserved tokens",
        ));
    }
    let vocab = Vocabulary::from_tokens(tokens[RESERVED..].iter().copied());
    if vocab.size() != tokens.len() {
        return Err(Error::parse(path, 1, "duplicate tokens in vocabulary"));
    }
    Ok(vocab)
}

/// Log-odds table as `word<TAB>class<TAB>score`, by class then descending
/// score.
pub fn write_log_odds(path: &Path, table: &LogOddsTable) -> Result<()> {
    let mut out = String::new();
    for (word, class, score) in table.export_rows() {
        writeln!(out, "{word}\t{class}\t{score:e}").ok();
    }
    write_text(path, &out)
}

/// Reads a table written by [`write_log_odds`]; words absent from the file
/// score zero.
pub fn read_log_odds(path: &Path, vocab: &Vocabulary, alpha0: f64) -> Result<LogOddsTable> {
    let text = read_text(path)?;
    let mut rows = Vec::new();
    for (i, line) in text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
    {
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 3 {
            return Err(Error::parse(path, i + 1, "expected word, class and score"));
        }
        let score: f64 = f[2].parse().map_err(|e| Error::parse(path, i + 1, e))?;
        rows.push((i + 1, f[1].to_string(), f[0].to_string(), score));
    }
    let classes = LabelSet::new(rows.iter().map(|r| r.1.clone()).collect());
    let v = vocab.size();
    let mut scores = vec![0.0; classes.len() * v];
    for (line, class, word, score) in rows {
        let y = classes.index_of(&class)?;
        let id = vocab
            .get(&word)
            .ok_or_else(|| Error::parse(path, line, format!("word {word:?} not in vocabulary")))?;
        scores[y * v + id as usize] = score;
    }
    Ok(LogOddsTable::from_scores(classes, vocab, scores, alpha0)?)
}

/// One line per training document, K space-separated probabilities.
pub fn write_confounds(path: &Path, confounds: &[ConfoundDistribution]) -> Result<()> {
    let mut out = String::new();
    for c in confounds {
        let line: Vec<String> = c.probs().iter().map(|p| format!("{p:e}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn read_confounds(path: &Path) -> Result<Vec<ConfoundDistribution>> {
    let text = read_text(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let probs = l
                .split_whitespace()
                .map(str::parse::<f64>)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(path, i + 1, e))?;
            ConfoundDistribution::new(probs).map_err(|e| Error::parse(path, i + 1, e))
        })
        .collect()
}

/// Lexicon as `rank<TAB>word<TAB>mean_score<TAB>count`, rank from 1.
pub fn format_lexicon(report: &LexiconReport) -> String {
    let mut out = String::new();
    for (i, e) in report.entries.iter().enumerate() {
        writeln!(
            out,
            "{}\t{}\t{:e}\t{}",
            i + 1,
            e.word,
            e.mean_score,
            e.count
        )
        .ok();
    }
    out
}

fn split_block(out: &mut String, prefix: &str, m: &SplitMetrics) {
    writeln!(out, "{prefix}_accuracy: {:.6}", m.accuracy).ok();
    writeln!(out, "{prefix}_examples: {}", m.num_examples).ok();
    for (class, acc) in &m.per_class_accuracy {
        writeln!(out, "{prefix}_accuracy[{class}]: {acc:.6}").ok();
    }
}

/// Report as `key: value` lines.
pub fn format_report(report: &EvalReport) -> String {
    let mut out = String::new();
    match report.mask_k {
        Some(k) => writeln!(out, "mask_k: {k}").ok(),
        None => writeln!(out, "mask_k: none").ok(),
    };
    writeln!(out, "classes: {}", report.classes.join(",")).ok();
    if let Some(m) = &report.in_domain {
        split_block(&mut out, "in_domain", m);
    }
    if let Some(m) = &report.out_domain {
        split_block(&mut out, "out_domain", m);
    }
    for w in &report.warnings {
        writeln!(out, "warning: {w}").ok();
    }
    out
}

/// Confusion matrix as CSV with a header row of predicted classes and one
/// row per gold class.
pub fn confusion_csv(classes: &[String], confusion: &[Vec<usize>]) -> String {
    let mut out = String::from("gold\\predicted");
    for c in classes {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for (c, row) in classes.iter().zip(confusion) {
        out.push_str(c);
        for v in row {
            write!(out, ",{v}").ok();
        }
        out.push('\n');
    }
    out
}

pub fn format_log_record(r: &LogRecord) -> Result<String> {
    serde_json::to_string(r).map_err(|e| Error::Invalid(e.to_string()))
}
