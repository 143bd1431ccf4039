use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use deconfound::checkpoint::Checkpoint;
use deconfound::manifest::MANIFEST_FILE;

const TINY: &[&str] = &[
    "synth.docs_per_class_per_domain=30",
    "synth.min_length=20",
    "synth.max_length=30",
    "synth.style_words_per_class=10",
    "synth.filler_vocab_size=100",
    "min_tokens=10",
    "embed_dim=8",
    "hidden_dim=8",
    "head_hidden=8",
    "max_epochs=2",
    "adversary_steps=5",
    "forgetting_steps=5",
    "outer_iterations=2",
    "learning_rate=0.01",
];

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deconfound"))
        .args(args)
        .current_dir(dir)
        .env_remove("DECONFOUND_OUT")
        .output()
        .unwrap()
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = run(args, dir);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn with_tiny<'a>(args: &[&'a str]) -> Vec<&'a str> {
    let mut v = args.to_vec();
    for kv in TINY {
        v.extend(["--set", kv]);
    }
    v
}

fn prepared(dir: &Path) -> PathBuf {
    ok(&with_tiny(&["synth", "--out", "s"]), dir);
    ok(
        &with_tiny(&["prepare", "--corpus", "s/corpus.jsonl", "--out", "p"]),
        dir,
    );
    dir.join("p")
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run(&["train", "--bogus"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(
        run(&["train", "--corpus", "missing.jsonl"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["synth", "--set", "nonsense=1"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn domain_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.jsonl"), "{\"label\": 3}\n").unwrap();
    let out = run(&["train", "--corpus", "bad.jsonl"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["synth", "--set", "synth.style_strength=2"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn default_output_directory_follows_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_deconfound"))
        .args(with_tiny(&["synth"]))
        .current_dir(dir.path())
        .env("DECONFOUND_OUT", "runs")
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    assert!(dir.path().join("runs/synth/corpus.jsonl").exists());
    ok(&with_tiny(&["synth"]), dir.path());
    assert!(dir.path().join("out/synth").join(MANIFEST_FILE).exists());
}

#[test]
fn pipeline_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let p = prepared(dir);
    for f in [
        "train.jsonl",
        "dev.jsonl",
        "test_in.jsonl",
        "test_out.jsonl",
        "vocab.txt",
        MANIFEST_FILE,
    ] {
        assert!(p.join(f).exists(), "{f}");
    }

    let listing = ok(
        &[
            "logodds",
            "--train",
            "p/train.jsonl",
            "--vocab",
            "p/vocab.txt",
            "--out",
            "l",
        ],
        dir,
    );
    assert_eq!(listing.lines().count(), 4);
    let table = std::fs::read_to_string(dir.join("l/log_odds.tsv")).unwrap();
    let first: Vec<&str> = table.lines().next().unwrap().split('\t').collect();
    assert_eq!(first.len(), 3);
    assert!(first[1].starts_with('c'));

    ok(
        &[
            "mask",
            "--input",
            "p/test_in.jsonl",
            "--table",
            "l/log_odds.tsv",
            "--k",
            "3",
            "--out",
            "m",
        ],
        dir,
    );
    let masked = std::fs::read_to_string(dir.join("m/masked.jsonl")).unwrap();
    assert!(masked.contains("<mask>"));

    let train = with_tiny(&[
        "train",
        "--mode",
        "alt-lo",
        "--corpus",
        "p/train.jsonl",
        "--dev",
        "p/dev.jsonl",
        "--confounds",
        "lo",
        "--test-in",
        "p/test_in.jsonl",
        "--test-out",
        "p/test_out.jsonl",
        "--seed",
        "3",
        "--out",
        "t",
    ]);
    ok(&train, dir);
    let t = dir.join("t");
    for f in [
        "checkpoint.json",
        "train_log.jsonl",
        "confounds.txt",
        "log_odds.tsv",
        "vocab.txt",
        MANIFEST_FILE,
    ] {
        assert!(t.join(f).exists(), "{f}");
    }
    assert!(t.join("phases/phase-latest.json").exists());
    let ckpt = Checkpoint::load(&t.join("checkpoint.json")).unwrap();
    assert_eq!(ckpt.state().unwrap().pool.len(), 2);
    assert_eq!(ckpt.config.seed, 3);
    let log = std::fs::read_to_string(t.join("train_log.jsonl")).unwrap();
    assert!(log
        .lines()
        .all(|l| serde_json::from_str::<serde_json::Value>(l).is_ok()));
    assert!(log.contains("topic_forget"));

    // identical seeds give identical checkpoints
    let mut again = train.clone();
    let at = again.iter().position(|a| *a == "t").unwrap();
    again[at] = "t2";
    ok(&again, dir);
    assert_eq!(
        std::fs::read(t.join("checkpoint.json")).unwrap(),
        std::fs::read(dir.join("t2/checkpoint.json")).unwrap()
    );

    // four masking levels give five reports; test sets come from the checkpoint
    ok(
        &[
            "eval",
            "--checkpoint",
            "t/checkpoint.json",
            "--mask-top-k",
            "20,50,100,200",
            "--out",
            "e",
        ],
        dir,
    );
    let reports = std::fs::read_to_string(dir.join("e/report.jsonl")).unwrap();
    assert_eq!(reports.lines().count(), 5);
    for suffix in ["", "_k20", "_k50", "_k100", "_k200"] {
        assert!(dir.join(format!("e/confusion_in{suffix}.csv")).exists());
        assert!(dir.join(format!("e/confusion_out{suffix}.csv")).exists());
    }

    let lex = ok(
        &[
            "lexicon",
            "--checkpoint",
            "t/checkpoint.json",
            "--test",
            "p/test_in.jsonl",
            "--method",
            "saliency",
            "--top-k",
            "5",
            "--min-count",
            "1",
            "--out",
            "x",
        ],
        dir,
    );
    assert_eq!(lex.lines().count(), 5);
    assert!(dir.join("x/lexicon_saliency.tsv").exists());

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("e").join(MANIFEST_FILE)).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "eval");
    assert!(!manifest["inputs"].as_array().unwrap().is_empty());
    assert!(manifest["outputs"].as_array().unwrap().len() >= 3);
}

#[test]
fn train_without_dev_and_linear_baseline() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    prepared(dir);
    ok(
        &with_tiny(&[
            "train",
            "--mode",
            "noadv",
            "--corpus",
            "p/train.jsonl",
            "--out",
            "n",
        ]),
        dir,
    );
    let ckpt = Checkpoint::load(&dir.join("n/checkpoint.json")).unwrap();
    assert!(ckpt.state().unwrap().pool.is_empty());
    ok(
        &with_tiny(&[
            "train",
            "--mode",
            "lr",
            "--corpus",
            "p/train.jsonl",
            "--out",
            "lr",
        ]),
        dir,
    );
    let out = ok(
        &[
            "eval",
            "--checkpoint",
            "lr/checkpoint.json",
            "--test-in",
            "p/test_in.jsonl",
            "--out",
            "e",
        ],
        dir,
    );
    assert!(out.contains("accuracy"));
    let out = run(
        &[
            "lexicon",
            "--checkpoint",
            "lr/checkpoint.json",
            "--test",
            "p/test_in.jsonl",
        ],
        dir,
    );
    assert_eq!(out.status.code(), Some(1));
    let out = run(
        &[
            "train",
            "--mode",
            "alt-lo",
            "--confounds",
            "lda",
            "--corpus",
            "p/train.jsonl",
        ],
        dir,
    );
    assert_eq!(out.status.code(), Some(2));
}
