//! Replays the checked-in fuzz seeds through the same entry points the
//! fuzz targets drive, so the seeds stay meaningful on stable toolchains.

use std::fs;
use std::path::PathBuf;

use textbench::harness::report::{parse_result, table2_text, table3_text, Comparisons};
use textbench::harness::{ExperimentConfig, SynthSection};
use textbench::io::{corpus_to_jsonl, dtm_to_text, parse_corpus, parse_dtm, parse_idf, parse_labels, parse_model};
use textbench::linalg::CsrMatrix;
use textbench::models::Scorer;
use textbench::textprep::{default_stopwords, preprocess_bytes, Vocabulary};

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn text(b: &[u8]) -> &str {
    std::str::from_utf8(b).unwrap()
}

#[test]
fn corpus_seeds() {
    let mut parsed = 0;
    for (name, b) in seeds("corpus_jsonl") {
        if let Ok(docs) = parse_corpus(text(&b), &name) {
            assert_eq!(parse_corpus(&corpus_to_jsonl(&docs).unwrap(), &name).unwrap(), docs);
            parsed += 1;
        }
    }
    assert!(parsed >= 2);
}

#[test]
fn dtm_seeds() {
    for (name, b) in seeds("dtm") {
        let m = parse_dtm(text(&b), &name).unwrap();
        assert_eq!(parse_dtm(&dtm_to_text(&m), &name).unwrap(), m);
    }
}

#[test]
fn label_seeds() {
    for (name, b) in seeds("labels") {
        let (&n, rest) = b.split_first().unwrap();
        assert_eq!(parse_labels(text(rest), &name, n as usize).unwrap().len(), n as usize);
    }
}

#[test]
fn vocab_seeds() {
    for (name, b) in seeds("vocab") {
        let v = Vocabulary::parse(text(&b), &name).unwrap();
        assert_eq!(Vocabulary::parse(&v.to_text(), &name).unwrap(), v);
    }
}

#[test]
fn idf_seeds() {
    for (name, b) in seeds("idf") {
        parse_idf(text(&b), &name).unwrap();
    }
}

#[test]
fn config_seeds() {
    for (name, b) in seeds("config") {
        ExperimentConfig::parse(text(&b), &name).unwrap().to_toml().unwrap();
    }
    for (name, b) in seeds("synth_spec") {
        SynthSection::parse(text(&b), &name).unwrap();
    }
}

#[test]
fn model_seeds() {
    for (name, b) in seeds("model") {
        let m = parse_model(text(&b)).unwrap_or_else(|e| panic!("{name}: {e}"));
        m.score(&CsrMatrix::zeros(1, m.n_features())).unwrap();
    }
}

#[test]
fn result_seeds() {
    for (name, b) in seeds("result") {
        let r = parse_result(text(&b), &name).unwrap();
        let cmp = Comparisons::of(&r);
        assert!(table2_text(&r, &cmp).starts_with("Model"));
        assert!(table3_text(&r, &cmp).starts_with("Model"));
    }
}

#[test]
fn preprocess_seeds() {
    for (_, b) in seeds("preprocess") {
        if let Ok(tokens) = preprocess_bytes(&b, default_stopwords()) {
            assert!(tokens.iter().all(|t| !t.is_empty() && !t.contains(char::is_whitespace)));
        }
    }
}
