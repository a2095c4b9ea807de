//! Text preprocessing: tokens, n-grams, vocabularies and document-term
//! matrices.

mod lemma;
mod matrix;
mod stats;
mod vocab;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use lemma::lemmatize;
pub use matrix::{binarize, build_matrix, tfidf, DocTermMatrix, TfidfTransform, Weighting};
pub use stats::{word_count_stats, CorpusStats, FiveNumber};
pub use vocab::{build_vocabulary, Vocabulary};

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

/// One labeled unit of text. `label` is `Some(true)` when the record meets
/// the case definition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub label: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn empty() -> Self {
        Self::default()
    }

    /// One term per line; blank lines are ignored.
    pub fn parse(text: &str) -> Self {
        Self(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn contains(&self, term: &str) -> bool {
        self.0.contains(term)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// The stopword list shipped with the crate.
pub fn default_stopwords() -> &'static Stopwords {
    static LIST: OnceLock<Stopwords> = OnceLock::new();
    LIST.get_or_init(|| Stopwords::parse(DEFAULT_STOPWORDS))
}

/// Lowercase, split on anything that is not a letter or digit, drop
/// stopwords, and reduce each word with [`lemmatize`]. Stopwords are
/// checked both before and after reduction.
pub fn preprocess(text: &str, stopwords: &Stopwords) -> Vec<String> {
    raw_words(text)
        .filter(|w| !stopwords.contains(w))
        .map(|w| lemmatize(&w))
        .filter(|w| !stopwords.contains(w))
        .collect()
}

pub fn preprocess_bytes(bytes: &[u8], stopwords: &Stopwords) -> Result<Vec<String>> {
    Ok(preprocess(std::str::from_utf8(bytes)?, stopwords))
}

/// Lowercased alphanumeric runs, with no other filtering.
pub(crate) fn raw_words(text: &str) -> impl Iterator<Item = String> + '_ {
    let lower = text.to_lowercase();
    let words: Vec<String> = lower
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect();
    words.into_iter()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NgramOrder {
    Unigram,
    Bigram,
}

impl NgramOrder {
    pub fn as_usize(self) -> usize {
        match self {
            NgramOrder::Unigram => 1,
            NgramOrder::Bigram => 2,
        }
    }
}

impl TryFrom<usize> for NgramOrder {
    type Error = Error;

    fn try_from(n: usize) -> Result<Self> {
        match n {
            1 => Ok(NgramOrder::Unigram),
            2 => Ok(NgramOrder::Bigram),
            _ => Err(Error::invalid(format!("n-gram order must be 1 or 2, got {n}"))),
        }
    }
}

impl FromStr for NgramOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.parse::<usize>()
            .map_err(|_| Error::invalid(format!("bad n-gram order {s:?}")))?
            .try_into()
    }
}

impl fmt::Display for NgramOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_usize())
    }
}

/// Counts of unigrams and, for [`NgramOrder::Bigram`], adjacent pairs keyed
/// as `"w1 w2"`.
pub fn extract_ngrams(tokens: &[String], n_max: NgramOrder) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for t in tokens {
        *counts.entry(t.clone()).or_insert(0) += 1;
    }
    if n_max == NgramOrder::Bigram {
        for pair in tokens.windows(2) {
            *counts.entry(format!("{} {}", pair[0], pair[1])).or_insert(0) += 1;
        }
    }
    counts
}

/// Tokenize every document of a corpus.
pub fn tokenize_corpus(corpus: &[Document], stopwords: &Stopwords) -> Vec<Vec<String>> {
    corpus.iter().map(|d| preprocess(&d.text, stopwords)).collect()
}
