#![no_main]
use libfuzzer_sys::fuzz_target;
use textbench::io::{dtm_to_text, parse_dtm};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = parse_dtm(text, "fuzz") {
        assert_eq!(parse_dtm(&dtm_to_text(&m), "fuzz").unwrap(), m);
    }
});
