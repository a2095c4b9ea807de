use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::textprep::{extract_ngrams, tokenize_corpus, Document, Stopwords, Vocabulary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    Count,
    Binary,
    Tfidf,
}

impl fmt::Display for Weighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Weighting::Count => "count",
            Weighting::Binary => "binary",
            Weighting::Tfidf => "tfidf",
        })
    }
}

impl FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "count" => Ok(Weighting::Count),
            "binary" => Ok(Weighting::Binary),
            "tfidf" => Ok(Weighting::Tfidf),
            _ => Err(Error::invalid(format!("unknown weighting {s:?}"))),
        }
    }
}

/// Documents × terms. Rows follow corpus order; stored values are positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocTermMatrix {
    pub matrix: CsrMatrix,
    pub weighting: Weighting,
}

impl DocTermMatrix {
    pub fn new(matrix: CsrMatrix, weighting: Weighting) -> Result<Self> {
        if matrix.values().iter().any(|&v| v <= 0.0) {
            return Err(Error::invalid("document-term values must be positive"));
        }
        if weighting == Weighting::Binary && matrix.values().iter().any(|&v| v != 1.0) {
            return Err(Error::invalid("binary matrix holds a value other than 1"));
        }
        Ok(Self { matrix, weighting })
    }

    pub fn from_token_docs(docs: &[Vec<String>], vocab: &Vocabulary) -> Self {
        let rows = docs
            .iter()
            .map(|tokens| {
                extract_ngrams(tokens, vocab.n_max())
                    .into_iter()
                    .filter_map(|(term, n)| vocab.get(&term).map(|j| (j, n as f64)))
                    .collect()
            })
            .collect();
        let matrix = CsrMatrix::from_rows(vocab.len(), rows).expect("vocabulary indices in range");
        Self { matrix, weighting: Weighting::Count }
    }

    pub fn n_docs(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.matrix.n_cols()
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self { matrix: self.matrix.select_rows(rows), weighting: self.weighting }
    }
}

/// Count matrix of `corpus` over a fixed vocabulary. Out-of-vocabulary
/// terms are dropped.
pub fn build_matrix(corpus: &[Document], stopwords: &Stopwords, vocab: &Vocabulary) -> DocTermMatrix {
    DocTermMatrix::from_token_docs(&tokenize_corpus(corpus, stopwords), vocab)
}

/// Every stored value becomes 1; the sparsity pattern is unchanged.
pub fn binarize(m: &DocTermMatrix) -> DocTermMatrix {
    DocTermMatrix { matrix: m.matrix.map_values(|_, _, _| 1.0), weighting: Weighting::Binary }
}

/// Smoothed inverse document frequencies, `ln((1 + n) / (1 + df)) + 1`,
/// followed by row L2 normalization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TfidfTransform {
    pub idf: Vec<f64>,
}

impl TfidfTransform {
    pub fn fit(counts: &DocTermMatrix) -> Result<Self> {
        if counts.weighting == Weighting::Tfidf {
            return Err(Error::invalid("tf-idf expects a count or binary matrix"));
        }
        let n = counts.n_docs() as f64;
        let mut df = vec![0usize; counts.n_features()];
        for (_, c, _) in counts.matrix.triplets() {
            df[c] += 1;
        }
        let idf = df.iter().map(|&d| ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0).collect();
        Ok(Self { idf })
    }

    pub fn apply(&self, counts: &DocTermMatrix) -> Result<DocTermMatrix> {
        if counts.weighting == Weighting::Tfidf {
            return Err(Error::invalid("tf-idf expects a count or binary matrix"));
        }
        if counts.n_features() != self.idf.len() {
            return Err(Error::DimensionMismatch { expected: self.idf.len(), found: counts.n_features() });
        }
        let weighted = counts.matrix.map_values(|_, c, v| v * self.idf[c]);
        let norms: Vec<f64> = (0..weighted.n_rows())
            .map(|r| weighted.row(r).1.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        let matrix = weighted.map_values(|r, _, v| v / norms[r]);
        Ok(DocTermMatrix { matrix, weighting: Weighting::Tfidf })
    }
}

/// TF-IDF with document frequencies taken from `m` itself.
pub fn tfidf(m: &DocTermMatrix) -> Result<DocTermMatrix> {
    TfidfTransform::fit(m)?.apply(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::NgramOrder;
    use proptest::prelude::*;

    fn counts(rows: Vec<Vec<(usize, f64)>>, n_cols: usize) -> DocTermMatrix {
        DocTermMatrix::new(CsrMatrix::from_rows(n_cols, rows).unwrap(), Weighting::Count).unwrap()
    }

    fn vocab_ab() -> Vocabulary {
        Vocabulary::parse("ngrams 1\na\t1\nb\t1\n", "v").unwrap()
    }

    fn doc(text: &str) -> Document {
        Document { id: "d".into(), text: text.into(), label: None }
    }

    #[test]
    fn matrix_examples() {
        let v = vocab_ab();
        let m = build_matrix(&[doc("a a b"), doc("zzz qqq"), doc("")], &Stopwords::empty(), &v);
        assert_eq!(m.matrix.row(0), (&[0usize, 1][..], &[2.0, 1.0][..]));
        assert_eq!(m.matrix.row(1).0.len(), 0);
        assert_eq!(m.matrix.row(2).0.len(), 0);
    }

    #[test]
    fn binarize_examples() {
        let m = counts(vec![vec![(0, 2.0), (2, 5.0)]], 3);
        let b = binarize(&m);
        assert_eq!(b.matrix.row(0), (&[0usize, 2][..], &[1.0, 1.0][..]));
        assert_eq!(binarize(&b), b);
        let empty = counts(vec![], 0);
        assert_eq!(binarize(&empty).matrix.nnz(), 0);
    }

    #[test]
    fn tfidf_single_document() {
        let m = counts(vec![vec![(0, 3.0), (1, 4.0)]], 2);
        let t = tfidf(&m).unwrap();
        // idf = ln(2/2) + 1 = 1 for every term, so only normalization remains
        assert_eq!(t.matrix.row(0).1, &[0.6, 0.8]);
    }

    #[test]
    fn tfidf_zero_row_and_min_idf() {
        let m = counts(vec![vec![(0, 1.0), (1, 2.0)], vec![], vec![(0, 1.0)]], 2);
        let tr = TfidfTransform::fit(&m).unwrap();
        assert!(tr.idf[0] < tr.idf[1]);
        let t = tr.apply(&m).unwrap();
        assert_eq!(t.matrix.row(1).0.len(), 0);
        assert!(tfidf(&t).is_err());
    }

    proptest! {
        #[test]
        fn tfidf_rows_unit_or_zero(rows in prop::collection::vec(prop::collection::vec((0usize..6, 1u32..5), 0..5), 1..8)) {
            let rows: Vec<Vec<(usize, f64)>> = rows.into_iter().map(|r| {
                let mut seen = std::collections::BTreeMap::new();
                for (c, v) in r { seen.insert(c, v as f64); }
                seen.into_iter().collect()
            }).collect();
            let t = tfidf(&counts(rows, 6)).unwrap();
            for r in 0..t.n_docs() {
                let n: f64 = t.matrix.row(r).1.iter().map(|v| v * v).sum::<f64>().sqrt();
                prop_assert!(n == 0.0 || (n - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn row_sums_match_in_vocab_tokens(words in prop::collection::vec("[a-e]", 0..25)) {
            let v = Vocabulary::parse("ngrams 1\na\t1\nb\t1\nc\t1\n", "v").unwrap();
            let m = DocTermMatrix::from_token_docs(std::slice::from_ref(&words), &v);
            let expected = words.iter().filter(|w| v.get(w).is_some()).count() as f64;
            prop_assert_eq!(m.matrix.row_sums()[0], expected);
            let _ = NgramOrder::Unigram;
        }
    }
}
