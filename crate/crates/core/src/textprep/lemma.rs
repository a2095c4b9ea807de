//! Rule-based reduction of English words to a base form.
//!
//! Applied to tokens made only of ASCII lowercase letters; anything else is
//! returned unchanged. One pass of the rules:
//!
//! 1. irregular forms from the exceptions table (`children` → `child`)
//! 2. words of three letters or fewer are kept
//! 3. `-sses` → `-ss`
//! 4. `-ies` → `-y` when the word is longer than four letters
//! 5. words ending `-ss`, `-us`, `-is` are kept
//! 6. `-xes`, `-ches`, `-shes` drop `-es`
//! 7. `-s` is dropped
//! 8. `-ing`, and `-ed` not preceded by `e`, are dropped when at least three
//!    letters containing a vowel remain; a trailing double consonant other
//!    than `l`, `s`, `z` is then undoubled, otherwise a consonant-vowel-
//!    consonant stem of length three regains a final `e`
//!
//! [`lemmatize`] repeats the pass until the word stops changing, so its
//! output is always a fixed point.

const EXCEPTIONS: &[(&str, &str)] = &[
    ("analyses", "analysis"),
    ("ate", "eat"),
    ("began", "begin"),
    ("begun", "begin"),
    ("best", "good"),
    ("better", "good"),
    ("brought", "bring"),
    ("came", "come"),
    ("children", "child"),
    ("criteria", "criterion"),
    ("diagnoses", "diagnosis"),
    ("done", "do"),
    ("feet", "foot"),
    ("felt", "feel"),
    ("gave", "give"),
    ("given", "give"),
    ("gone", "go"),
    ("knew", "know"),
    ("known", "know"),
    ("men", "man"),
    ("mice", "mouse"),
    ("people", "person"),
    ("ran", "run"),
    ("said", "say"),
    ("sat", "sit"),
    ("saw", "see"),
    ("seen", "see"),
    ("spoke", "speak"),
    ("spoken", "speak"),
    ("stood", "stand"),
    ("taken", "take"),
    ("teeth", "tooth"),
    ("thought", "think"),
    ("told", "tell"),
    ("took", "take"),
    ("went", "go"),
    ("women", "woman"),
    ("worse", "bad"),
    ("worst", "bad"),
    ("written", "write"),
    ("wrote", "write"),
];

pub fn lemmatize(word: &str) -> String {
    let mut current = word.to_string();
    // Every rule shortens the word, so this terminates well before the cap.
    for _ in 0..32 {
        match reduce_once(&current) {
            Some(next) if next != current => current = next,
            _ => break,
        }
    }
    current
}

fn reduce_once(w: &str) -> Option<String> {
    if w.is_empty() || !w.bytes().all(|b| b.is_ascii_lowercase()) {
        return None;
    }
    if let Ok(i) = EXCEPTIONS.binary_search_by(|(k, _)| k.cmp(&w)) {
        return Some(EXCEPTIONS[i].1.to_string());
    }
    if w.len() <= 3 {
        return None;
    }
    if let Some(stem) = w.strip_suffix("sses") {
        return Some(format!("{stem}ss"));
    }
    if let Some(stem) = w.strip_suffix("ies") {
        return (w.len() > 4).then(|| format!("{stem}y"));
    }
    if w.ends_with("ss") || w.ends_with("us") || w.ends_with("is") {
        return None;
    }
    for suffix in ["xes", "ches", "shes"] {
        if w.ends_with(suffix) {
            return Some(w[..w.len() - 2].to_string());
        }
    }
    if let Some(stem) = w.strip_suffix('s') {
        return Some(stem.to_string());
    }
    if let Some(stem) = w.strip_suffix("ing") {
        return strip_verbal(stem);
    }
    if w.ends_with("ed") && !w.ends_with("eed") {
        return strip_verbal(&w[..w.len() - 2]);
    }
    None
}

fn strip_verbal(stem: &str) -> Option<String> {
    if stem.len() < 3 || !stem.bytes().any(is_vowel) {
        return None;
    }
    let b = stem.as_bytes();
    let n = b.len();
    if b[n - 1] == b[n - 2] && !is_vowel(b[n - 1]) && !matches!(b[n - 1], b'l' | b's' | b'z') {
        return Some(stem[..n - 1].to_string());
    }
    if n == 3 && !is_vowel(b[0]) && is_vowel(b[1]) && !is_vowel(b[2]) && !matches!(b[2], b'w' | b'x' | b'y') {
        return Some(format!("{stem}e"));
    }
    Some(stem.to_string())
}

fn is_vowel(b: u8) -> bool {
    matches!(b, b'a' | b'e' | b'i' | b'o' | b'u' | b'y')
}
