use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Compressed sparse row matrix. Column indices within a row are strictly
/// increasing, so entries are stored in row-major order without duplicates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCsr")]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawCsr {
    n_rows: usize,
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl TryFrom<RawCsr> for CsrMatrix {
    type Error = Error;

    fn try_from(r: RawCsr) -> Result<Self> {
        Self::new(r.n_rows, r.n_cols, r.indptr, r.indices, r.values)
    }
}

impl CsrMatrix {
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if indptr.len() != n_rows.saturating_add(1) || indptr[0] != 0 {
            return Err(Error::invalid("row pointer array has the wrong shape"));
        }
        if indices.len() != values.len() || *indptr.last().unwrap() != indices.len() {
            return Err(Error::invalid("row pointer array does not cover the entries"));
        }
        for r in 0..n_rows {
            let (lo, hi) = (indptr[r], indptr[r + 1]);
            if lo > hi {
                return Err(Error::invalid("row pointers are not monotone"));
            }
            let cols = &indices[lo..hi];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid(format!("row {r} has unsorted or duplicate columns")));
            }
            if cols.last().is_some_and(|&c| c >= n_cols) {
                return Err(Error::invalid(format!("row {r} has a column out of range")));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix contains non-finite values"));
        }
        Ok(Self { n_rows, n_cols, indptr, indices, values })
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            indptr: vec![0; n_rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Build from per-row entry lists. Entries are sorted by column; exact
    /// zeros are dropped and duplicate columns are rejected.
    pub fn from_rows(n_cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n_rows = rows.len();
        let mut indptr = Vec::with_capacity(n_rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                if v != 0.0 {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self::new(n_rows, n_cols, indptr, indices, values)
    }

    /// Build from (row, col, value) triplets in any order.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut rows = vec![Vec::new(); n_rows];
        for (r, c, v) in triplets {
            if r >= n_rows {
                return Err(Error::invalid(format!("row {r} out of range")));
            }
            rows[r].push((c, v));
        }
        Self::from_rows(n_cols, rows)
    }

    pub fn from_dense(m: &DenseMatrix) -> Self {
        let rows = (0..m.rows())
            .map(|i| m.row(i).iter().copied().enumerate().collect())
            .collect();
        Self::from_rows(m.cols(), rows).expect("dense rows are well formed")
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[lo..hi], &self.values[lo..hi])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterate stored entries as (row, col, value) in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    /// Same sparsity pattern, values transformed by `f`. Entries mapped to
    /// zero are removed.
    pub fn map_values(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> Self {
        let rows = (0..self.n_rows)
            .map(|r| {
                let (cols, vals) = self.row(r);
                cols.iter().zip(vals).map(|(&c, &v)| (c, f(r, c, v))).collect()
            })
            .collect();
        Self::from_rows(self.n_cols, rows).expect("pattern preserved")
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for &r in rows {
            let (c, v) = self.row(r);
            indices.extend_from_slice(c);
            values.extend_from_slice(v);
            indptr.push(indices.len());
        }
        Self { n_rows: rows.len(), n_cols: self.n_cols, indptr, indices, values }
    }

    /// Keep the listed columns, renumbered 0..cols.len() in the given order.
    pub fn select_cols(&self, cols: &[usize]) -> Self {
        let mut remap = vec![usize::MAX; self.n_cols];
        for (new, &old) in cols.iter().enumerate() {
            remap[old] = new;
        }
        let rows = (0..self.n_rows)
            .map(|r| {
                let (c, v) = self.row(r);
                c.iter()
                    .zip(v)
                    .filter(|(&c, _)| remap[c] != usize::MAX)
                    .map(|(&c, &v)| (remap[c], v))
                    .collect()
            })
            .collect();
        Self::from_rows(cols.len(), rows).expect("columns remapped in range")
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for i in 0..self.n_cols {
            counts[i + 1] += counts[i];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                let slot = next[c];
                indices[slot] = r;
                values[slot] = v;
                next[c] += 1;
            }
        }
        Self { n_rows: self.n_cols, n_cols: self.n_rows, indptr, indices, values }
    }

    /// `M x`
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n_cols, x.len())?;
        Ok((0..self.n_rows)
            .map(|r| {
                let (cols, vals) = self.row(r);
                cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum()
            })
            .collect())
    }

    /// `Mᵀ x`
    pub fn spmtv(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n_rows, x.len())?;
        let mut out = vec![0.0; self.n_cols];
        for (r, &xr) in x.iter().enumerate() {
            if xr == 0.0 {
                continue;
            }
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                out[c] += v * xr;
            }
        }
        Ok(out)
    }

    /// `M D` for a dense `D` with `n_cols` rows.
    pub fn mul_dense(&self, d: &DenseMatrix) -> Result<DenseMatrix> {
        check_len(self.n_cols, d.rows())?;
        let k = d.cols();
        let mut out = DenseMatrix::zeros(self.n_rows, k);
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            let dst = out.row_mut(r);
            for (&c, &v) in cols.iter().zip(vals) {
                for (o, &s) in dst.iter_mut().zip(d.row(c)) {
                    *o += v * s;
                }
            }
        }
        Ok(out)
    }

    /// `Mᵀ D` for a dense `D` with `n_rows` rows.
    pub fn tmul_dense(&self, d: &DenseMatrix) -> Result<DenseMatrix> {
        check_len(self.n_rows, d.rows())?;
        let k = d.cols();
        let mut out = DenseMatrix::zeros(self.n_cols, k);
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            let src = d.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                for (o, &s) in out.row_mut(c).iter_mut().zip(src) {
                    *o += v * s;
                }
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for (r, c, v) in self.triplets() {
            out[(r, c)] = v;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n_rows).map(|r| self.row(r).1.iter().sum()).collect()
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
