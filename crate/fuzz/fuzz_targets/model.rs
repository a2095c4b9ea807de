#![no_main]
use libfuzzer_sys::fuzz_target;
use textbench::io::parse_model;
use textbench::linalg::CsrMatrix;
use textbench::models::Scorer;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // a model that loads must score an empty document without panicking
    if let Ok(m) = parse_model(text) {
        if m.n_features() <= 1 << 20 {
            let _ = m.score(&CsrMatrix::zeros(1, m.n_features()));
        }
    }
});
