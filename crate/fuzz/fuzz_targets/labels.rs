#![no_main]
use libfuzzer_sys::fuzz_target;
use textbench::io::parse_labels;

fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else {
        return;
    };
    let Ok(text) = std::str::from_utf8(rest) else {
        return;
    };
    if let Ok(labels) = parse_labels(text, "fuzz", n as usize) {
        assert_eq!(labels.len(), n as usize);
    }
});
