//! Command-line entry points.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use deconfound_core::analyze::{attention_lexicon, saliency_lexicon, DEFAULT_MIN_COUNT};
use deconfound_core::confounds::LogOddsTable;
use deconfound_core::corpus::{generate_synthetic, mask_top_k, split_corpus, Document, Vocabulary};
use deconfound_core::evaluate::{evaluate_accuracy, masked_evaluation, EvalReport};
use deconfound_core::training::{ConfoundMode, LogRecord, TrainMode, TrainObserver, TrainState};
use serde::Serialize;

use crate::bench::{format_bench_table, run_bench, BenchConfig};
use crate::checkpoint::Checkpoint;
use crate::error::Error;
use crate::io;
use crate::manifest::Manifest;
use crate::pipeline::{encode, train_model, training_log_odds};
use crate::settings::Settings;

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "DECONFOUND_OUT";

#[derive(Parser, Debug)]
#[command(
    name = "deconfound",
    version,
    about = "Train text classifiers that demote latent topical confounds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Flat `key = value` settings file
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Setting override, may be repeated; wins over the config file
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Seed for every random stream
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory [default: $DECONFOUND_OUT/<command>, else out/<command>]
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Attention,
    Saliency,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate the synthetic confounded corpus
    Synth {
        #[command(flatten)]
        common: Common,
    },
    /// Filter, balance and split a corpus; build the vocabulary
    Prepare {
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Compute the log-odds table of a training set
    Logodds {
        #[arg(long)]
        train: PathBuf,
        /// Vocabulary file [default: built from the training set]
        #[arg(long)]
        vocab: Option<PathBuf>,
        /// Words per class listed in top_words.txt
        #[arg(long, default_value_t = 20)]
        top_k: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Replace the top-k log-odds words of every class by the mask token
    Mask {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        table: PathBuf,
        /// Vocabulary file [default: the words listed in the table]
        #[arg(long)]
        vocab: Option<PathBuf>,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Train a model and write a checkpoint and training log
    Train {
        /// noadv, alt-lo, alt-lda, gr-lo or lr
        #[arg(long)]
        mode: Option<String>,
        /// Training corpus (JSON lines)
        #[arg(long)]
        corpus: PathBuf,
        /// Dev corpus [default: every tenth training document]
        #[arg(long)]
        dev: Option<PathBuf>,
        /// Vocabulary file [default: built from the training corpus]
        #[arg(long)]
        vocab: Option<PathBuf>,
        /// Confound source, lo or lda; must agree with the mode
        #[arg(long)]
        confounds: Option<String>,
        /// In-domain test set recorded in the checkpoint for `eval`
        #[arg(long)]
        test_in: Option<PathBuf>,
        /// Out-of-domain test set recorded in the checkpoint for `eval`
        #[arg(long)]
        test_out: Option<PathBuf>,
        /// Keep one checkpoint per phase boundary instead of the latest only
        #[arg(long)]
        keep_phase_checkpoints: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a checkpoint, optionally on masked test copies
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        test_in: Option<PathBuf>,
        #[arg(long)]
        test_out: Option<PathBuf>,
        /// Comma-separated k values for masked evaluation
        #[arg(long, value_delimiter = ',')]
        mask_top_k: Vec<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Build an attention or saliency lexicon
    Lexicon {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Attention)]
        method: Method,
        #[arg(long, default_value_t = 20)]
        top_k: usize,
        #[arg(long, default_value_t = DEFAULT_MIN_COUNT)]
        min_count: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Run every mode on the synthetic benchmark and print a comparison
    Bench {
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Synth { .. } => "synth",
            Command::Prepare { .. } => "prepare",
            Command::Logodds { .. } => "logodds",
            Command::Mask { .. } => "mask",
            Command::Train { .. } => "train",
            Command::Eval { .. } => "eval",
            Command::Lexicon { .. } => "lexicon",
            Command::Bench { .. } => "bench",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Synth { common }
            | Command::Prepare { common, .. }
            | Command::Logodds { common, .. }
            | Command::Mask { common, .. }
            | Command::Train { common, .. }
            | Command::Eval { common, .. }
            | Command::Lexicon { common, .. }
            | Command::Bench { common } => common,
        }
    }
}

/// Failure classes mapped to exit codes 2 and 1.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Domain(Error),
}

impl<E: Into<Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Domain(e.into())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parses `args` (program name first) and runs the command. Returns 0 on
/// success, 1 on a domain error and 2 on a usage error.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let argv: Vec<String> = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match run(cli.command, &argv) {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            2
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn require(path: &Path) -> CliResult<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{} does not exist", path.display())))
    }
}

fn settings_for(common: &Common, base: Settings) -> CliResult<Settings> {
    let mut s = base;
    if let Some(path) = &common.config {
        require(path)?;
        s.apply_file(path)?;
    }
    for kv in &common.set {
        s.apply_override(kv).map_err(Failure::Usage)?;
    }
    if let Some(seed) = common.seed {
        s.set_seed(seed);
    }
    Ok(s)
}

fn out_dir(common: &Common, command: &str) -> PathBuf {
    common.out.clone().unwrap_or_else(|| {
        std::env::var_os(OUT_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("out"))
            .join(command)
    })
}

struct Outputs {
    dir: PathBuf,
    manifest: Manifest,
}

impl Outputs {
    fn new(
        dir: PathBuf,
        command: &str,
        argv: &[String],
        seed: u64,
        echo: &impl Serialize,
    ) -> CliResult<Self> {
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Outputs {
            manifest: Manifest::new(command, argv, seed, echo)?,
            dir,
        })
    }

    fn input(&mut self, path: &Path) -> CliResult<()> {
        self.manifest.input(path)?;
        Ok(())
    }

    fn text(&mut self, name: &str, contents: &str) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        io::write_text(&path, contents)?;
        self.manifest.output(&path)?;
        Ok(path)
    }

    fn record(&mut self, path: &Path) -> CliResult<()> {
        self.manifest.output(path)?;
        Ok(())
    }

    fn finish(self) -> CliResult<()> {
        self.manifest.write(&self.dir)?;
        Ok(())
    }
}

fn jsonl<T: Serialize>(items: &[T]) -> CliResult<String> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).map_err(|e| Error::Invalid(e.to_string()))?);
        out.push('\n');
    }
    Ok(out)
}

/// Streams log records to a file and writes phase-boundary checkpoints.
struct RunLog {
    writer: BufWriter<File>,
    path: PathBuf,
    phase_dir: Option<PathBuf>,
    keep_all: bool,
    phases: usize,
    error: Option<Error>,
}

#[derive(Serialize)]
struct PhaseCheckpoint<'a> {
    format: &'static str,
    index: usize,
    state: &'a TrainState,
}

impl RunLog {
    fn create(path: PathBuf, phase_dir: Option<PathBuf>, keep_all: bool) -> CliResult<Self> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        Ok(RunLog {
            writer: BufWriter::new(file),
            path,
            phase_dir,
            keep_all,
            phases: 0,
            error: None,
        })
    }

    fn fail(&mut self, e: Error) {
        self.error.get_or_insert(e);
    }

    fn close(mut self) -> CliResult<PathBuf> {
        if let Err(e) = self.writer.flush() {
            self.fail(Error::io(&self.path, e));
        }
        match self.error {
            Some(e) => Err(e.into()),
            None => Ok(self.path),
        }
    }
}

impl TrainObserver for RunLog {
    fn record(&mut self, record: &LogRecord) {
        let line = io::format_log_record(record)
            .and_then(|l| writeln!(self.writer, "{l}").map_err(|e| Error::io(&self.path, e)));
        if let Err(e) = line {
            self.fail(e);
        }
    }

    fn phase_end(&mut self, state: &TrainState) {
        self.phases += 1;
        let Some(dir) = &self.phase_dir else { return };
        let name = if self.keep_all {
            format!("phase-{:03}-{}.json", self.phases, state.phase.name())
        } else {
            "phase-latest.json".into()
        };
        let ckpt = PhaseCheckpoint {
            format: "deconfound-phase-checkpoint/1",
            index: self.phases,
            state,
        };
        let result = serde_json::to_string(&ckpt)
            .map_err(|e| Error::Invalid(e.to_string()))
            .and_then(|text| io::write_text(&dir.join(name), &text));
        if let Err(e) = result {
            self.fail(e);
        }
    }
}

fn run(command: Command, argv: &[String]) -> CliResult<()> {
    let name = command.name();
    let common = command.common().clone();
    let out = out_dir(&common, name);
    match command {
        Command::Synth { .. } => {
            let s = settings_for(&common, Settings::default())?;
            s.synth.validate()?;
            let mut o = Outputs::new(out, name, argv, s.synth.seed, &s.synth)?;
            let docs = generate_synthetic(&s.synth)?;
            let path = o.dir.join("corpus.jsonl");
            io::write_corpus(&path, &docs)?;
            o.record(&path)?;
            let topics: Vec<String> = s.synth.topic_words().into_iter().collect();
            o.text("topic_words.txt", &(topics.join("\n") + "\n"))?;
            println!("wrote {} documents to {}", docs.len(), path.display());
            o.finish()
        }
        Command::Prepare { corpus, .. } => {
            require(&corpus)?;
            let s = settings_for(&common, Settings::default())?;
            s.split.validate()?;
            let mut o = Outputs::new(out, name, argv, s.split.seed, &s)?;
            o.input(&corpus)?;
            let docs = io::read_corpus(&corpus)?;
            let splits = split_corpus(&docs, &s.split)?;
            let vocab = Vocabulary::build(&splits.train, s.max_vocab)?;
            for (file, set) in [
                ("train.jsonl", &splits.train),
                ("dev.jsonl", &splits.dev),
                ("test_in.jsonl", &splits.test_in),
                ("test_out.jsonl", &splits.test_out),
            ] {
                let path = o.dir.join(file);
                io::write_corpus(&path, set)?;
                o.record(&path)?;
            }
            let vpath = o.dir.join("vocab.txt");
            io::write_vocab(&vpath, &vocab)?;
            o.record(&vpath)?;
            println!(
                "train {} dev {} test_in {} test_out {} vocabulary {}",
                splits.train.len(),
                splits.dev.len(),
                splits.test_in.len(),
                splits.test_out.len(),
                vocab.size()
            );
            o.finish()
        }
        Command::Logodds {
            train,
            vocab,
            top_k,
            ..
        } => {
            require(&train)?;
            let s = settings_for(&common, Settings::default())?;
            let mut o = Outputs::new(out, name, argv, s.train.seed, &s)?;
            o.input(&train)?;
            let docs = io::read_corpus(&train)?;
            let vocab = load_or_build_vocab(&mut o, vocab.as_deref(), &docs, s.max_vocab)?;
            let classes = deconfound_core::corpus::LabelSet::from_documents(&docs);
            let table = training_log_odds(&vocab, &classes, &docs, s.train.alpha0)?;
            let tpath = o.dir.join("log_odds.tsv");
            io::write_log_odds(&tpath, &table)?;
            o.record(&tpath)?;
            let mut listing = String::new();
            for c in classes.names() {
                listing.push_str(&format!(
                    "{c}: {}\n",
                    table.top_k_words(c, top_k)?.join(" ")
                ));
            }
            o.text("top_words.txt", &listing)?;
            print!("{listing}");
            o.finish()
        }
        Command::Mask {
            input,
            table,
            vocab,
            k,
            ..
        } => {
            require(&input)?;
            require(&table)?;
            let s = settings_for(&common, Settings::default())?;
            let mut o = Outputs::new(out, name, argv, s.train.seed, &s)?;
            o.input(&input)?;
            o.input(&table)?;
            let vocab = match vocab {
                Some(p) => {
                    require(&p)?;
                    o.input(&p)?;
                    io::read_vocab(&p)?
                }
                None => vocab_of_table(&table)?,
            };
            let table = io::read_log_odds(&table, &vocab, s.train.alpha0)?;
            let docs = io::read_corpus(&input)?;
            let masked: Vec<Document> = docs.iter().map(|d| mask_top_k(d, &table, k)).collect();
            let path = o.dir.join("masked.jsonl");
            io::write_corpus(&path, &masked)?;
            o.record(&path)?;
            println!("masked {} documents with k={k}", masked.len());
            o.finish()
        }
        Command::Train {
            mode,
            corpus,
            dev,
            vocab,
            confounds,
            test_in,
            test_out,
            keep_phase_checkpoints,
            ..
        } => {
            require(&corpus)?;
            let mut s = settings_for(&common, Settings::default())?;
            if let Some(m) = &mode {
                s.set("mode", m).map_err(Failure::Usage)?;
            }
            let mode = s.train.mode;
            if let Some(c) = &confounds {
                let c = ConfoundMode::parse(c).map_err(|e| Failure::Usage(e.to_string()))?;
                if mode.confound_mode() != Some(c) {
                    return Err(Failure::Usage(format!(
                        "mode {} does not use {} confounds",
                        mode.name(),
                        c.name()
                    )));
                }
            }
            let mut o = Outputs::new(out, name, argv, s.train.seed, &s)?;
            o.input(&corpus)?;
            let all = io::read_corpus(&corpus)?;
            let (train_docs, dev_docs) = match &dev {
                Some(p) => {
                    require(p)?;
                    o.input(p)?;
                    (all, io::read_corpus(p)?)
                }
                None => holdout_every_tenth(all),
            };
            let vocab = load_or_build_vocab(&mut o, vocab.as_deref(), &train_docs, s.max_vocab)?;
            let phase_dir = Some(o.dir.join("phases"));
            let mut log = RunLog::create(
                o.dir.join("train_log.jsonl"),
                phase_dir,
                keep_phase_checkpoints,
            )?;
            let result = train_model(mode, &s, &train_docs, &dev_docs, &vocab, &mut log);
            let log_path = log.close()?;
            let trained = result?;
            o.record(&log_path)?;
            let mut ckpt = trained.checkpoint;
            ckpt.data.train = Some(corpus.clone());
            ckpt.data.dev = dev.clone();
            ckpt.data.test_in = test_in;
            ckpt.data.test_out = test_out;
            let cpath = o.dir.join("checkpoint.json");
            ckpt.save(&cpath)?;
            o.record(&cpath)?;
            if let Some(table) = &ckpt.log_odds {
                let p = o.dir.join("log_odds.tsv");
                io::write_log_odds(&p, table)?;
                o.record(&p)?;
            }
            if let Some(c) = &trained.confounds {
                let p = o.dir.join("confounds.txt");
                io::write_confounds(&p, &c.distributions)?;
                o.record(&p)?;
            }
            match ckpt.state() {
                Some(st) => println!(
                    "{}: best dev accuracy {:.4}, {} steps, pool size {}",
                    mode.name(),
                    st.best_dev,
                    st.step,
                    st.pool.len()
                ),
                None => println!("{}: fitted", mode.name()),
            }
            o.finish()
        }
        Command::Eval {
            checkpoint,
            test_in,
            test_out,
            mask_top_k,
            ..
        } => {
            require(&checkpoint)?;
            let s = settings_for(&common, Settings::default())?;
            let mut o = Outputs::new(out, name, argv, s.train.seed, &s)?;
            o.input(&checkpoint)?;
            let ckpt = Checkpoint::load(&checkpoint)?;
            let test_in = test_in.or_else(|| ckpt.data.test_in.clone());
            let test_out = test_out.or_else(|| ckpt.data.test_out.clone());
            if test_in.is_none() && test_out.is_none() {
                return Err(Failure::Usage(
                    "no test set: pass --test-in/--test-out or record them at training time".into(),
                ));
            }
            let mut load = |p: &Option<PathBuf>| -> CliResult<Vec<Document>> {
                match p {
                    Some(p) => {
                        require(p)?;
                        o.input(p)?;
                        Ok(io::read_corpus(p)?)
                    }
                    None => Ok(Vec::new()),
                }
            };
            let (din, dout) = (load(&test_in)?, load(&test_out)?);
            let predictor = ckpt.predictor();
            let mut reports = vec![evaluate_accuracy(predictor.as_ref(), &din, &dout)?];
            if !mask_top_k.is_empty() {
                let table: &LogOddsTable = ckpt.log_odds.as_ref().ok_or_else(|| {
                    Error::Invalid("checkpoint has no log-odds table for masking".into())
                })?;
                reports.extend(masked_evaluation(
                    predictor.as_ref(),
                    table,
                    &din,
                    &dout,
                    &mask_top_k,
                )?);
            }
            write_reports(&mut o, &reports)?;
            o.finish()
        }
        Command::Lexicon {
            checkpoint,
            test,
            method,
            top_k,
            min_count,
            ..
        } => {
            require(&checkpoint)?;
            require(&test)?;
            let s = settings_for(&common, Settings::default())?;
            let mut o = Outputs::new(out, name, argv, s.train.seed, &s)?;
            o.input(&checkpoint)?;
            o.input(&test)?;
            let ckpt = Checkpoint::load(&checkpoint)?;
            let net = ckpt
                .network()
                .ok_or_else(|| Error::Invalid("lexicons need a neural checkpoint".into()))?;
            let docs = encode(&ckpt.vocab, &ckpt.classes, &io::read_corpus(&test)?)?;
            let (report, file) = match method {
                Method::Attention => (
                    attention_lexicon(net, &ckpt.vocab, &docs, top_k, min_count)?,
                    "lexicon_attention.tsv",
                ),
                Method::Saliency => (
                    saliency_lexicon(net, &ckpt.vocab, &docs, top_k, min_count)?,
                    "lexicon_saliency.tsv",
                ),
            };
            let text = io::format_lexicon(&report);
            o.text(file, &text)?;
            print!("{text}");
            o.finish()
        }
        Command::Bench { .. } => {
            let base = BenchConfig::new(common.seed.unwrap_or(0));
            let settings = settings_for(&common, base.settings.clone())?;
            let config = BenchConfig { settings, ..base };
            let mut o = Outputs::new(out, name, argv, config.settings.train.seed, &config)?;
            let log_dir = o.dir.join("logs");
            let mut logs: Vec<PathBuf> = Vec::new();
            let mut pending: Option<Error> = None;
            println!(
                "{:<8} {:>7} {:>7} {:>9} {:>7} {:>13} {:>13}",
                "mode", "in", "out", "in@mask", "drop", "attention", "saliency"
            );
            let run = {
                let mut observer = |mode: TrainMode| -> Box<dyn TrainObserver> {
                    let path = log_dir.join(format!("{}.jsonl", mode.name()));
                    match RunLog::create(path.clone(), None, false) {
                        Ok(l) => {
                            logs.push(path);
                            Box::new(l)
                        }
                        Err(Failure::Domain(e)) => {
                            pending.get_or_insert(e);
                            Box::new(deconfound_core::training::NoopObserver)
                        }
                        Err(Failure::Usage(m)) => {
                            pending.get_or_insert(Error::Invalid(m));
                            Box::new(deconfound_core::training::NoopObserver)
                        }
                    }
                };
                run_bench(&config, &mut |line| println!("{line}"), &mut observer)
            };
            if let Some(e) = pending {
                return Err(e.into());
            }
            let run = run?;
            for p in &logs {
                o.record(p)?;
            }
            for ckpt in &run.checkpoints {
                let p = o
                    .dir
                    .join("checkpoints")
                    .join(format!("{}.json", ckpt.mode.name()));
                ckpt.save(&p)?;
                o.record(&p)?;
            }
            let table = format_bench_table(&run.report);
            o.text("bench_report.txt", &table)?;
            let json = serde_json::to_string_pretty(&run.report)
                .map_err(|e| Error::Invalid(e.to_string()))?;
            o.text("bench_report.json", &(json + "\n"))?;
            o.finish()
        }
    }
}

fn load_or_build_vocab(
    o: &mut Outputs,
    path: Option<&Path>,
    docs: &[Document],
    max: usize,
) -> CliResult<Vocabulary> {
    match path {
        Some(p) => {
            require(p)?;
            o.input(p)?;
            Ok(io::read_vocab(p)?)
        }
        None => {
            let v = Vocabulary::build(docs, max)?;
            let p = o.dir.join("vocab.txt");
            io::write_vocab(&p, &v)?;
            o.record(&p)?;
            Ok(v)
        }
    }
}

/// Vocabulary made of the words listed in a log-odds table file.
fn vocab_of_table(path: &Path) -> CliResult<Vocabulary> {
    let text = io::read_text(path)?;
    let mut seen = std::collections::BTreeSet::new();
    let mut words = Vec::new();
    for line in text.lines() {
        if let Some(w) = line.split('\t').next().filter(|w| !w.is_empty()) {
            if seen.insert(w.to_string()) {
                words.push(w.to_string());
            }
        }
    }
    Ok(Vocabulary::from_tokens(words))
}

/// Splits off every tenth document (positions 9, 19, ...) as dev.
fn holdout_every_tenth(docs: Vec<Document>) -> (Vec<Document>, Vec<Document>) {
    let mut train = Vec::new();
    let mut dev = Vec::new();
    for (i, d) in docs.into_iter().enumerate() {
        if i % 10 == 9 {
            dev.push(d);
        } else {
            train.push(d);
        }
    }
    (train, dev)
}

fn write_reports(o: &mut Outputs, reports: &[EvalReport]) -> CliResult<()> {
    let mut text = String::new();
    for (i, r) in reports.iter().enumerate() {
        if i > 0 {
            text.push('\n');
        }
        text.push_str(&io::format_report(r));
        let suffix = r.mask_k.map_or_else(String::new, |k| format!("_k{k}"));
        if let Some(m) = &r.in_domain {
            o.text(
                &format!("confusion_in{suffix}.csv"),
                &io::confusion_csv(&r.classes, &m.confusion),
            )?;
        }
        if let Some(m) = &r.out_domain {
            o.text(
                &format!("confusion_out{suffix}.csv"),
                &io::confusion_csv(&r.classes, &m.confusion),
            )?;
        }
    }
    o.text("report.txt", &text)?;
    o.text("report.jsonl", &jsonl(reports)?)?;
    print!("{text}");
    Ok(())
}
