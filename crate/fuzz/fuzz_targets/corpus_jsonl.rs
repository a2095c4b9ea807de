#![no_main]
use libfuzzer_sys::fuzz_target;
use textbench::io::{corpus_to_jsonl, parse_corpus};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(docs) = parse_corpus(text, "fuzz") {
        // whatever parses must survive a round trip
        let again = corpus_to_jsonl(&docs).unwrap();
        assert_eq!(parse_corpus(&again, "fuzz").unwrap(), docs);
    }
});
