use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::textprep::{raw_words, Document};

/// Minimum, quartiles and maximum. Quartiles interpolate linearly between
/// order statistics (position `(n - 1) p` in the sorted sample).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl FiveNumber {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("five-number summary of an empty sample"));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self {
            min: sorted[0],
            q1: quantile_sorted(&sorted, 0.25),
            median: quantile_sorted(&sorted, 0.5),
            q3: quantile_sorted(&sorted, 0.75),
            max: sorted[sorted.len() - 1],
        })
    }
}

pub(crate) fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Word counts per document, taken over lowercased alphanumeric words
/// before stopword removal or lemmatization.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusStats {
    pub total: Vec<usize>,
    pub unique: Vec<usize>,
    pub total_summary: FiveNumber,
    pub unique_summary: FiveNumber,
}

pub fn word_count_stats(corpus: &[Document]) -> Result<CorpusStats> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let (total, unique): (Vec<usize>, Vec<usize>) = corpus
        .iter()
        .map(|d| {
            let words: Vec<String> = raw_words(&d.text).collect();
            let distinct: HashSet<&String> = words.iter().collect();
            (words.len(), distinct.len())
        })
        .unzip();
    let as_f64 = |v: &[usize]| v.iter().map(|&x| x as f64).collect::<Vec<_>>();
    Ok(CorpusStats {
        total_summary: FiveNumber::of(&as_f64(&total))?,
        unique_summary: FiveNumber::of(&as_f64(&unique))?,
        total,
        unique,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(text: &str) -> Document {
        Document { id: String::new(), text: text.into(), label: None }
    }

    #[test]
    fn totals_two_to_ten() {
        let s = FiveNumber::of(&[6.0, 2.0, 10.0, 4.0, 8.0]).unwrap();
        assert_eq!((s.min, s.q1, s.median, s.q3, s.max), (2.0, 4.0, 6.0, 8.0, 10.0));
    }

    #[test]
    fn single_document() {
        let s = word_count_stats(&[doc("a a b")]).unwrap();
        for v in [s.total_summary.min, s.total_summary.q1, s.total_summary.median, s.total_summary.q3, s.total_summary.max] {
            assert_eq!(v, 3.0);
        }
        assert_eq!(s.unique_summary.median, 2.0);
    }

    #[test]
    fn eight_document_fixture() {
        // totals 1..=8 words; sorted order statistics read off by hand:
        // q1 at position 1.75 -> 2.75, median at 3.5 -> 4.5, q3 at 5.25 -> 6.25
        let texts = ["x", "x y", "x y z", "a a a a", "b c d e f", "g g g g g g", "h i h i h i h", "j k l m n o p q"];
        let corpus: Vec<_> = texts.iter().map(|t| doc(t)).collect();
        let s = word_count_stats(&corpus).unwrap();
        let t = s.total_summary;
        assert_eq!((t.min, t.q1, t.median, t.q3, t.max), (1.0, 2.75, 4.5, 6.25, 8.0));
        // unique counts: 1 2 3 1 5 1 2 8 -> sorted 1 1 1 2 2 3 5 8
        let u = s.unique_summary;
        assert_eq!((u.min, u.q1, u.median, u.q3, u.max), (1.0, 1.0, 2.0, 3.5, 8.0));
        assert!(s.unique.iter().zip(&s.total).all(|(u, t)| u <= t));
    }
}
