//! File formats: JSON Lines corpora, triplet document-term matrices, label
//! files and the model container.
//!
//! Each format has a `parse_*` function over in-memory text (the path is
//! only used in error messages) and a `read_*` wrapper that loads a file.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::models::FittedModel;
use crate::textprep::{DocTermMatrix, Document, TfidfTransform, Weighting};

pub const MODEL_FORMAT: &str = "textbench-model";
pub const MODEL_VERSION: u32 = 1;

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(Error::file(path))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(Error::file(path))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CorpusLine {
    id: String,
    text: String,
    #[serde(default)]
    label: Option<u8>,
}

/// One `{"id", "text", "label"}` object per line. Blank lines are skipped;
/// ids must be unique.
pub fn parse_corpus(text: &str, path: &str) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 1;
        let rec: CorpusLine = serde_json::from_str(line).map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        let label = match rec.label {
            None => None,
            Some(0) => Some(false),
            Some(1) => Some(true),
            Some(v) => return Err(Error::parse(path, lineno, format!("label must be 0, 1 or null, got {v}"))),
        };
        if !seen.insert(rec.id.clone()) {
            return Err(Error::parse(path, lineno, format!("duplicate id {:?}", rec.id)));
        }
        docs.push(Document { id: rec.id, text: rec.text, label });
    }
    Ok(docs)
}

pub fn read_corpus(path: &Path) -> Result<Vec<Document>> {
    parse_corpus(&read_text(path)?, &path.display().to_string())
}

pub fn corpus_to_jsonl(docs: &[Document]) -> Result<String> {
    #[derive(Serialize)]
    struct Line<'a> {
        id: &'a str,
        text: &'a str,
        label: Option<u8>,
    }
    let mut out = String::new();
    for d in docs {
        out.push_str(&serde_json::to_string(&Line { id: &d.id, text: &d.text, label: d.label.map(u8::from) })?);
        out.push('\n');
    }
    Ok(out)
}

/// Header `n_docs n_features nnz weighting`, then `row col value` triplets
/// in row-major order.
pub fn dtm_to_text(m: &DocTermMatrix) -> String {
    let x = &m.matrix;
    let mut out = format!("{} {} {} {}\n", x.n_rows(), x.n_cols(), x.nnz(), m.weighting);
    for (r, c, v) in x.triplets() {
        let _ = writeln!(out, "{r} {c} {v}");
    }
    out
}

pub fn parse_dtm(text: &str, path: &str) -> Result<DocTermMatrix> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::parse(path, 1, "empty matrix file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [n_docs, n_features, nnz, weighting] = fields[..] else {
        return Err(Error::parse(path, 1, "expected `n_docs n_features nnz weighting`"));
    };
    let num = |s: &str, what: &str| s.parse::<usize>().map_err(|_| Error::parse(path, 1, format!("bad {what}")));
    let (n_docs, n_features, nnz) = (num(n_docs, "n_docs")?, num(n_features, "n_features")?, num(nnz, "nnz")?);
    let weighting: Weighting = weighting.parse().map_err(|e: Error| Error::parse(path, 1, e.to_string()))?;
    if nnz > n_docs.saturating_mul(n_features) {
        return Err(Error::parse(path, 1, "nnz exceeds n_docs × n_features"));
    }

    let mut indptr = Vec::with_capacity(n_docs + 1);
    indptr.push(0);
    let mut indices = Vec::with_capacity(nnz.min(1 << 20));
    let mut values = Vec::with_capacity(nnz.min(1 << 20));
    let mut last: Option<(usize, usize)> = None;
    for (i, line) in lines {
        let lineno = i + 1;
        let mut it = line.split_whitespace();
        let (Some(r), Some(c), Some(v), None) = (it.next(), it.next(), it.next(), it.next()) else {
            return Err(Error::parse(path, lineno, "expected `row col value`"));
        };
        let r: usize = r.parse().map_err(|_| Error::parse(path, lineno, "bad row index"))?;
        let c: usize = c.parse().map_err(|_| Error::parse(path, lineno, "bad column index"))?;
        let v: f64 = v.parse().map_err(|_| Error::parse(path, lineno, "bad value"))?;
        if r >= n_docs || c >= n_features {
            return Err(Error::parse(path, lineno, format!("entry ({r}, {c}) outside {n_docs} × {n_features}")));
        }
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::parse(path, lineno, "values must be finite and positive"));
        }
        if last.is_some_and(|p| p >= (r, c)) {
            return Err(Error::parse(path, lineno, "triplets must be strictly increasing in row-major order"));
        }
        if values.len() == nnz {
            return Err(Error::parse(path, lineno, "more triplets than the header's nnz"));
        }
        while indptr.len() <= r {
            indptr.push(indices.len());
        }
        indices.push(c);
        values.push(v);
        last = Some((r, c));
    }
    if values.len() != nnz {
        return Err(Error::parse(path, 1, format!("header says {nnz} entries, found {}", values.len())));
    }
    while indptr.len() <= n_docs {
        indptr.push(indices.len());
    }
    let matrix = CsrMatrix::new(n_docs, n_features, indptr, indices, values)?;
    DocTermMatrix::new(matrix, weighting).map_err(|e| Error::parse(path, 1, e.to_string()))
}

pub fn read_dtm(path: &Path) -> Result<DocTermMatrix> {
    parse_dtm(&read_text(path)?, &path.display().to_string())
}

/// `row label` lines with labels 0 or 1; every row in `0..n_docs` exactly
/// once, in any order.
pub fn parse_labels(text: &str, path: &str, n_docs: usize) -> Result<Vec<bool>> {
    let mut labels: Vec<Option<bool>> = vec![None; n_docs];
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 1;
        let mut it = line.split_whitespace();
        let (Some(r), Some(l), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::parse(path, lineno, "expected `row label`"));
        };
        let r: usize = r.parse().map_err(|_| Error::parse(path, lineno, "bad row index"))?;
        let l = match l {
            "0" => false,
            "1" => true,
            _ => return Err(Error::parse(path, lineno, "label must be 0 or 1")),
        };
        let slot = labels.get_mut(r).ok_or_else(|| Error::parse(path, lineno, format!("row {r} out of range")))?;
        if slot.replace(l).is_some() {
            return Err(Error::parse(path, lineno, format!("row {r} labelled twice")));
        }
    }
    labels
        .into_iter()
        .enumerate()
        .map(|(r, l)| l.ok_or_else(|| Error::parse(path, 0, format!("row {r} has no label"))))
        .collect()
}

pub fn read_labels(path: &Path, n_docs: usize) -> Result<Vec<bool>> {
    parse_labels(&read_text(path)?, &path.display().to_string(), n_docs)
}

pub fn labels_to_text(labels: &[bool]) -> String {
    let mut out = String::new();
    for (r, &l) in labels.iter().enumerate() {
        let _ = writeln!(out, "{r} {}", u8::from(l));
    }
    out
}

#[derive(Serialize, Deserialize)]
struct Container<M> {
    format: String,
    version: u32,
    model: M,
}

pub fn model_to_json(model: &FittedModel) -> Result<String> {
    let c = Container { format: MODEL_FORMAT.to_string(), version: MODEL_VERSION, model };
    Ok(serde_json::to_string(&c)?)
}

pub fn parse_model(text: &str) -> Result<FittedModel> {
    #[derive(Deserialize)]
    struct Header {
        format: String,
        version: u32,
    }
    let h: Header = serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
    if h.format != MODEL_FORMAT {
        return Err(Error::ModelFormat(format!("format {:?}, expected {MODEL_FORMAT:?}", h.format)));
    }
    if h.version != MODEL_VERSION {
        return Err(Error::ModelFormat(format!("version {}, expected {MODEL_VERSION}", h.version)));
    }
    let c: Container<FittedModel> = serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
    c.model.validate()?;
    Ok(c.model)
}

pub fn save_model(path: &Path, model: &FittedModel) -> Result<()> {
    write_text(path, &model_to_json(model)?)
}

pub fn load_model(path: &Path) -> Result<FittedModel> {
    parse_model(&read_text(path)?).map_err(|e| match e {
        Error::ModelFormat(msg) => Error::ModelFormat(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Inverse document frequencies saved as JSON.
pub fn parse_idf(text: &str, path: &str) -> Result<TfidfTransform> {
    let t: TfidfTransform = serde_json::from_str(text).map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
    if t.idf.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::parse(path, 1, "idf values must be finite and positive"));
    }
    Ok(t)
}

pub fn read_idf(path: &Path) -> Result<TfidfTransform> {
    parse_idf(&read_text(path)?, &path.display().to_string())
}
