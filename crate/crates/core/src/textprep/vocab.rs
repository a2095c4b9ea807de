use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::textprep::{extract_ngrams, tokenize_corpus, Document, NgramOrder, Stopwords};

/// Term → column map. Terms are indexed in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    n_max: NgramOrder,
    terms: Vec<String>,
    df: Vec<usize>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn from_token_docs(docs: &[Vec<String>], n_max: NgramOrder, min_df: usize) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for tokens in docs {
            for term in extract_ngrams(tokens, n_max).into_keys() {
                *df.entry(term).or_insert(0) += 1;
            }
        }
        let min_df = min_df.max(1);
        let (terms, df): (Vec<_>, Vec<_>) = df.into_iter().filter(|&(_, n)| n >= min_df).unzip();
        Ok(Self::from_parts(n_max, terms, df))
    }

    fn from_parts(n_max: NgramOrder, terms: Vec<String>, df: Vec<usize>) -> Self {
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self { n_max, terms, df, index }
    }

    pub fn n_max(&self) -> NgramOrder {
        self.n_max
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, i: usize) -> &str {
        &self.terms[i]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn document_frequency(&self, i: usize) -> usize {
        self.df[i]
    }

    /// Text form: a header `ngrams N`, then one `term<TAB>df` line per term
    /// in index order.
    pub fn to_text(&self) -> String {
        let mut out = format!("ngrams {}\n", self.n_max);
        for (t, d) in self.terms.iter().zip(&self.df) {
            out.push_str(&format!("{t}\t{d}\n"));
        }
        out
    }

    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let n_max = match lines.next() {
            Some((_, h)) => h
                .strip_prefix("ngrams ")
                .ok_or_else(|| Error::parse(path, 1, "expected `ngrams N` header"))?
                .trim()
                .parse::<NgramOrder>()
                .map_err(|e| Error::parse(path, 1, e.to_string()))?,
            None => return Err(Error::parse(path, 1, "empty vocabulary file")),
        };
        let mut terms = Vec::new();
        let mut df = Vec::new();
        for (i, line) in lines {
            let lineno = i + 1;
            let (term, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, lineno, "expected `term<TAB>df`"))?;
            let count: usize = count.parse().map_err(|_| Error::parse(path, lineno, "bad document frequency"))?;
            if count == 0 || term.is_empty() {
                return Err(Error::parse(path, lineno, "empty term or zero document frequency"));
            }
            if terms.last().is_some_and(|prev: &String| prev.as_str() >= term) {
                return Err(Error::parse(path, lineno, "terms must be strictly increasing"));
            }
            let words = term.split(' ').count();
            if words > n_max.as_usize() || term.split(' ').any(str::is_empty) {
                return Err(Error::parse(path, lineno, "term does not match the n-gram order"));
            }
            terms.push(term.to_string());
            df.push(count);
        }
        Ok(Self::from_parts(n_max, terms, df))
    }
}

pub fn build_vocabulary(
    corpus: &[Document],
    stopwords: &Stopwords,
    n_max: NgramOrder,
    min_df: usize,
) -> Result<Vocabulary> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Vocabulary::from_token_docs(&tokenize_corpus(corpus, stopwords), n_max, min_df)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(texts: &[&str]) -> Vec<Document> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| Document { id: i.to_string(), text: t.to_string(), label: None })
            .collect()
    }

    #[test]
    fn two_doc_example() {
        let v = build_vocabulary(&docs(&["a b", "b c"]), &Stopwords::empty(), NgramOrder::Unigram, 1).unwrap();
        assert_eq!(v.terms(), &["a", "b", "c"]);
        assert_eq!((0..3).map(|i| v.document_frequency(i)).collect::<Vec<_>>(), vec![1, 2, 1]);

        let v = build_vocabulary(&docs(&["a b", "b c"]), &Stopwords::empty(), NgramOrder::Unigram, 2).unwrap();
        assert_eq!(v.terms(), &["b"]);
    }

    #[test]
    fn empty_corpus_errors() {
        assert!(matches!(
            build_vocabulary(&[], &Stopwords::empty(), NgramOrder::Unigram, 1),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn bigram_vocab_contains_unigrams() {
        let d = docs(&["the quick brown fox", "a lazy dog", "quick dog"]);
        let uni = build_vocabulary(&d, &Stopwords::empty(), NgramOrder::Unigram, 1).unwrap();
        let bi = build_vocabulary(&d, &Stopwords::empty(), NgramOrder::Bigram, 1).unwrap();
        assert!(bi.len() >= uni.len());
        assert!(uni.terms().iter().all(|t| bi.get(t).is_some()));
    }

    #[test]
    fn text_round_trip() {
        let d = docs(&["alpha beta", "beta gamma beta"]);
        let v = build_vocabulary(&d, &Stopwords::empty(), NgramOrder::Bigram, 1).unwrap();
        assert_eq!(Vocabulary::parse(&v.to_text(), "v").unwrap(), v);
        assert!(Vocabulary::parse("ngrams 1\nb\t1\na\t1\n", "v").is_err());
        assert!(Vocabulary::parse("ngrams 1\na b\t1\n", "v").is_err());
    }
}
