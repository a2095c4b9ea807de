#![no_main]
use libfuzzer_sys::fuzz_target;
use textbench::harness::report::{parse_result, table2_text, table3_text, Comparisons};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // rendering a decoded result must not panic either
    if let Ok(r) = parse_result(text, "fuzz") {
        let cmp = Comparisons::of(&r);
        let _ = table2_text(&r, &cmp);
        let _ = table3_text(&r, &cmp);
    }
});
