#![no_main]
use libfuzzer_sys::fuzz_target;
use textbench::io::parse_idf;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_idf(text, "fuzz");
    }
});
