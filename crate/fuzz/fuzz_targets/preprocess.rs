#![no_main]
use libfuzzer_sys::fuzz_target;
use textbench::textprep::{default_stopwords, preprocess_bytes};

fuzz_target!(|data: &[u8]| {
    if let Ok(tokens) = preprocess_bytes(data, default_stopwords()) {
        assert!(tokens.iter().all(|t| !t.is_empty() && !t.contains(char::is_whitespace)));
    }
});
