//! One-command reproduction on the synthetic benchmark: generate the
//! corpus, train every mode, evaluate in-domain, out-of-domain and masked,
//! and build attention and saliency lexicons.

use std::fmt::Write as _;

use deconfound_core::analyze::{
    attention_lexicon, saliency_lexicon, LexiconReport, DEFAULT_MIN_COUNT,
};
use deconfound_core::corpus::{generate_synthetic, split_corpus, SyntheticWordKind, Vocabulary};
use deconfound_core::evaluate::{evaluate_accuracy, masked_evaluation};
use deconfound_core::training::{NoopObserver, TrainMode, TrainObserver};
use serde::{Deserialize, Serialize};

use crate::checkpoint::Checkpoint;
use crate::error::{Error, Result};
use crate::pipeline::{encode, train_model};
use crate::settings::Settings;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub settings: Settings,
    pub modes: Vec<TrainMode>,
    /// Per-class top-k masked at test time; defaults to the size of the
    /// planted topic vocabulary.
    pub mask_k: usize,
    pub lexicon_top_k: usize,
    pub min_count: usize,
}

impl BenchConfig {
    /// Default synthetic corpus and a compact model sized for a CPU run.
    pub fn new(seed: u64) -> Self {
        let mut settings = Settings::default();
        settings.set_seed(seed);
        settings.embed_dim = 32;
        settings.hidden_dim = 32;
        settings.head_hidden = 64;
        let mask_k = settings.synth.num_classes * settings.synth.topic_words_per_class;
        BenchConfig {
            settings,
            modes: TrainMode::ALL.to_vec(),
            mask_k,
            lexicon_top_k: 20,
            min_count: DEFAULT_MIN_COUNT,
        }
    }
}

/// Share of lexicon words of each synthetic kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LexiconComposition {
    pub topic: f64,
    pub style: f64,
    pub filler: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeResult {
    pub mode: TrainMode,
    pub accuracy_in: f64,
    pub accuracy_out: f64,
    pub masked_accuracy_in: f64,
    /// In-domain accuracy lost to masking, in percentage points.
    pub masked_drop: f64,
    pub attention: Option<LexiconReport>,
    pub saliency: Option<LexiconReport>,
    pub attention_mix: Option<LexiconComposition>,
    pub saliency_mix: Option<LexiconComposition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub seed: u64,
    pub mask_k: usize,
    pub masked_words: usize,
    pub results: Vec<ModeResult>,
}

impl BenchReport {
    pub fn result(&self, mode: TrainMode) -> Option<&ModeResult> {
        self.results.iter().find(|r| r.mode == mode)
    }
}

pub struct BenchRun {
    pub report: BenchReport,
    pub checkpoints: Vec<Checkpoint>,
}

fn composition(report: &LexiconReport, settings: &Settings) -> LexiconComposition {
    let n = report.entries.len().max(1) as f64;
    let mut c = LexiconComposition::default();
    for e in &report.entries {
        match settings.synth.word_kind(&e.word) {
            Some(SyntheticWordKind::Topic(_)) => c.topic += 1.0 / n,
            Some(SyntheticWordKind::Style(_)) => c.style += 1.0 / n,
            Some(SyntheticWordKind::Filler) => c.filler += 1.0 / n,
            None => {}
        }
    }
    c
}

/// Runs the benchmark. `progress` receives one line per finished mode;
/// `observer` builds a training observer per mode.
pub fn run_bench(
    config: &BenchConfig,
    progress: &mut dyn FnMut(&str),
    observer: &mut dyn FnMut(TrainMode) -> Box<dyn TrainObserver>,
) -> Result<BenchRun> {
    let s = &config.settings;
    s.validate()?;
    let corpus = generate_synthetic(&s.synth)?;
    let splits = split_corpus(&corpus, &s.split)?;
    let vocab = Vocabulary::build(&splits.train, s.max_vocab)?;
    let mut results = Vec::new();
    let mut checkpoints = Vec::new();
    let mut masked_words = 0;
    for &mode in &config.modes {
        let mut obs = observer(mode);
        let out = train_model(mode, s, &splits.train, &splits.dev, &vocab, obs.as_mut())?;
        let ckpt = out.checkpoint;
        let predictor = ckpt.predictor();
        let plain = evaluate_accuracy(predictor.as_ref(), &splits.test_in, &splits.test_out)?;
        let table = ckpt
            .log_odds
            .as_ref()
            .ok_or_else(|| Error::Invalid("checkpoint lacks a log-odds table".into()))?;
        masked_words = deconfound_core::corpus::masked_word_ids(table, config.mask_k).len();
        let masked = masked_evaluation(
            predictor.as_ref(),
            table,
            &splits.test_in,
            &[],
            &[config.mask_k],
        )?;
        let acc_in = plain.accuracy_in().unwrap_or(0.0);
        let acc_masked = masked[0].accuracy_in().unwrap_or(0.0);
        let (attention, saliency) = match ckpt.network() {
            Some(net) => {
                let test = encode(&vocab, &ckpt.classes, &splits.test_in)?;
                (
                    Some(attention_lexicon(
                        net,
                        &vocab,
                        &test,
                        config.lexicon_top_k,
                        config.min_count,
                    )?),
                    Some(saliency_lexicon(
                        net,
                        &vocab,
                        &test,
                        config.lexicon_top_k,
                        config.min_count,
                    )?),
                )
            }
            None => (None, None),
        };
        let result = ModeResult {
            mode,
            accuracy_in: acc_in,
            accuracy_out: plain.accuracy_out().unwrap_or(0.0),
            masked_accuracy_in: acc_masked,
            masked_drop: 100.0 * (acc_in - acc_masked),
            attention_mix: attention.as_ref().map(|r| composition(r, s)),
            saliency_mix: saliency.as_ref().map(|r| composition(r, s)),
            attention,
            saliency,
        };
        progress(&format_row(&result));
        drop(predictor);
        results.push(result);
        checkpoints.push(ckpt);
    }
    Ok(BenchRun {
        report: BenchReport {
            seed: s.train.seed,
            mask_k: config.mask_k,
            masked_words,
            results,
        },
        checkpoints,
    })
}

/// Runs the benchmark without progress output or logs.
pub fn run_bench_quiet(config: &BenchConfig) -> Result<BenchRun> {
    run_bench(config, &mut |_| {}, &mut |_| Box::new(NoopObserver))
}

fn pct(x: f64) -> String {
    format!("{:.1}", 100.0 * x)
}

fn mix(m: &Option<LexiconComposition>) -> String {
    m.map_or_else(
        || "-".into(),
        |c| {
            format!(
                "{:.0}/{:.0}/{:.0}",
                100.0 * c.topic,
                100.0 * c.style,
                100.0 * c.filler
            )
        },
    )
}

fn format_row(r: &ModeResult) -> String {
    format!(
        "{:<8} {:>7} {:>7} {:>9} {:>7.1} {:>13} {:>13}",
        r.mode.name(),
        pct(r.accuracy_in),
        pct(r.accuracy_out),
        pct(r.masked_accuracy_in),
        r.masked_drop,
        mix(&r.attention_mix),
        mix(&r.saliency_mix)
    )
}

/// Plain-text comparison table; lexicon columns give the topic/style/filler
/// percentages of the top words.
pub fn format_bench_table(report: &BenchReport) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "seed {}  mask k={} ({} words masked)",
        report.seed, report.mask_k, report.masked_words
    )
    .ok();
    writeln!(
        out,
        "{:<8} {:>7} {:>7} {:>9} {:>7} {:>13} {:>13}",
        "mode", "in", "out", "in@mask", "drop", "attention", "saliency"
    )
    .ok();
    for r in &report.results {
        writeln!(out, "{}", format_row(r)).ok();
    }
    out
}
