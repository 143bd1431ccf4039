use deconfound::checkpoint::{Checkpoint, CHECKPOINT_FORMAT};
use deconfound::io;
use deconfound::pipeline::{encode, train_model, training_log_odds};
use deconfound::settings::Settings;
use deconfound_core::confounds::ConfoundDistribution;
use deconfound_core::corpus::{
    generate_synthetic, split_corpus, Document, Domain, LabelSet, Vocabulary,
};
use deconfound_core::evaluate::{evaluate_accuracy, EvalReport};
use deconfound_core::training::{NoopObserver, TrainMode};
use proptest::prelude::*;

fn tiny() -> Settings {
    let mut s = Settings::default();
    for kv in [
        "synth.docs_per_class_per_domain=20",
        "synth.min_length=15",
        "synth.max_length=25",
        "synth.style_words_per_class=8",
        "synth.filler_vocab_size=60",
        "min_tokens=10",
        "embed_dim=6",
        "hidden_dim=6",
        "head_hidden=6",
        "max_epochs=1",
        "adversary_steps=3",
        "forgetting_steps=3",
        "outer_iterations=1",
        "lda_topics=4",
        "lda_iterations=5",
    ] {
        s.apply_override(kv).unwrap();
    }
    s
}

#[test]
fn corpus_vocab_and_table_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let s = tiny();
    let docs = generate_synthetic(&s.synth).unwrap();
    let path = dir.path().join("c/corpus.jsonl");
    io::write_corpus(&path, &docs).unwrap();
    assert_eq!(io::read_corpus(&path).unwrap(), docs);

    let vocab = Vocabulary::build(&docs, 100).unwrap();
    let vpath = dir.path().join("vocab.txt");
    io::write_vocab(&vpath, &vocab).unwrap();
    assert_eq!(io::read_vocab(&vpath).unwrap(), vocab);

    let classes = LabelSet::from_documents(&docs);
    let table = training_log_odds(&vocab, &classes, &docs, 10.0).unwrap();
    let tpath = dir.path().join("lo.tsv");
    io::write_log_odds(&tpath, &table).unwrap();
    let back = io::read_log_odds(&tpath, &vocab, 10.0).unwrap();
    for c in classes.names() {
        assert_eq!(
            back.top_k_words(c, 15).unwrap(),
            table.top_k_words(c, 15).unwrap()
        );
    }
}

#[test]
fn raw_text_lines_are_tokenized() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("raw.jsonl");
    std::fs::write(
        &path,
        "{\"text\": \"I don't know.\", \"label\": \"a\", \"domain\": \"out\"}\n\n",
    )
    .unwrap();
    let docs = io::read_corpus(&path).unwrap();
    assert_eq!(docs.len(), 1);
    assert_eq!(docs[0].tokens, ["i", "do", "n't", "know", "."]);
    assert_eq!(docs[0].domain, Domain::Out);
    std::fs::write(&path, "{\"tokens\": [\"a\"]}\n").unwrap();
    let err = io::read_corpus(&path).unwrap_err().to_string();
    assert!(err.contains(":1"), "{err}");
}

#[test]
fn checkpoints_roundtrip_exactly() {
    let s = tiny();
    let docs = generate_synthetic(&s.synth).unwrap();
    let splits = split_corpus(&docs, &s.split).unwrap();
    let vocab = Vocabulary::build(&splits.train, s.max_vocab).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for mode in TrainMode::ALL {
        let out = train_model(
            mode,
            &s,
            &splits.train,
            &splits.dev,
            &vocab,
            &mut NoopObserver,
        )
        .unwrap();
        let path = dir.path().join(format!("{}.json", mode.name()));
        out.checkpoint.save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap();
        assert_eq!(back, out.checkpoint, "{}", mode.name());
        let a = evaluate_accuracy(
            out.checkpoint.predictor().as_ref(),
            &splits.test_in,
            &splits.test_out,
        )
        .unwrap();
        let b = evaluate_accuracy(back.predictor().as_ref(), &splits.test_in, &splits.test_out)
            .unwrap();
        assert_eq!(a, b);
        if let Some(c) = &out.confounds {
            let cpath = dir.path().join("confounds.txt");
            io::write_confounds(&cpath, &c.distributions).unwrap();
            let read = io::read_confounds(&cpath).unwrap();
            assert_eq!(read.len(), c.distributions.len());
            for (x, y) in read.iter().zip(&c.distributions) {
                assert_eq!(x.probs(), y.probs());
            }
        }
    }
    let text = std::fs::read_to_string(dir.path().join("noadv.json")).unwrap();
    assert!(text.contains(CHECKPOINT_FORMAT));
    let tampered = text.replace(CHECKPOINT_FORMAT, "deconfound-checkpoint/0");
    assert!(Checkpoint::from_json(&tampered)
        .unwrap_err()
        .contains("unsupported"));
    let classes = LabelSet::from_documents(&splits.train);
    assert!(encode(&vocab, &classes, &splits.test_out).is_ok());
}

#[test]
fn eval_reports_roundtrip_through_jsonl() {
    let s = tiny();
    let docs = generate_synthetic(&s.synth).unwrap();
    let splits = split_corpus(&docs, &s.split).unwrap();
    let vocab = Vocabulary::build(&splits.train, s.max_vocab).unwrap();
    let out = train_model(
        TrainMode::Lr,
        &s,
        &splits.train,
        &splits.dev,
        &vocab,
        &mut NoopObserver,
    )
    .unwrap();
    let report =
        evaluate_accuracy(out.checkpoint.predictor().as_ref(), &splits.test_in, &[]).unwrap();
    assert!(report.out_domain.is_none());
    assert!(!report.warnings.is_empty());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.jsonl");
    io::write_jsonl(&path, &[report.clone(), report.clone()]).unwrap();
    let back: Vec<EvalReport> = io::read_jsonl(&path).unwrap();
    assert_eq!(back, vec![report.clone(), report.clone()]);
    let text = io::format_report(&report);
    assert!(text.contains("in_domain_accuracy: "));
    assert!(text.contains("warning: "));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn documents_survive_the_file_format(
        tokens in prop::collection::vec("[a-z']{1,6}|<mask>|\"|\\\\", 1..20),
        label in "[a-z]{1,4}",
        out in any::<bool>(),
    ) {
        let domain = if out { Domain::Out } else { Domain::In };
        let doc = Document::new(tokens, label, domain).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        io::write_corpus(&path, std::slice::from_ref(&doc)).unwrap();
        prop_assert_eq!(io::read_corpus(&path).unwrap(), vec![doc]);
    }

    #[test]
    fn confounds_survive_the_file_format(raw in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 3), 1..10)) {
        let dists: Vec<ConfoundDistribution> = raw
            .into_iter()
            .map(|v| {
                let s: f64 = v.iter().sum();
                ConfoundDistribution::new(v.into_iter().map(|x| x / s).collect()).unwrap()
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt");
        io::write_confounds(&path, &dists).unwrap();
        let back = io::read_confounds(&path).unwrap();
        for (a, b) in back.iter().zip(&dists) {
            prop_assert_eq!(a.probs(), b.probs());
        }
    }
}
