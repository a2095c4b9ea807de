#![no_main]
use libfuzzer_sys::fuzz_target;
use textbench::textprep::Vocabulary;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(v) = Vocabulary::parse(text, "fuzz") {
        assert_eq!(Vocabulary::parse(&v.to_text(), "fuzz").unwrap(), v);
    }
});
