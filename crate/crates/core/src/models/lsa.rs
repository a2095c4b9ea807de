//! Latent semantic analysis: projection onto the top right singular
//! vectors of the training matrix, followed by a linear SVM.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{truncated_svd, CsrMatrix, DenseMatrix, SvdParams};
use crate::models::svm::{LinearSvmModel, SvmParams};
use crate::models::{check_features, Scorer};

pub const DEFAULT_LSA_RANK: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LsaModel {
    pub s: Vec<f64>,
    /// `d × n_features`.
    pub vt: DenseMatrix,
}

impl LsaModel {
    pub fn fit(x: &CsrMatrix, d: usize, seed: u64) -> Result<Self> {
        let svd = truncated_svd(x, d, seed, SvdParams::default())?;
        let achievable = svd.numerical_rank();
        if achievable < d {
            return Err(Error::RankDeficient { requested: d, achievable });
        }
        Ok(Self { s: svd.s, vt: svd.vt })
    }

    pub fn rank(&self) -> usize {
        self.vt.rows()
    }

    /// `X V_d`, one row of `d` coordinates per document.
    pub fn transform(&self, x: &CsrMatrix) -> Result<DenseMatrix> {
        check_features(self.vt.cols(), x)?;
        let d = self.rank();
        let mut out = DenseMatrix::zeros(x.n_rows(), d);
        for r in 0..x.n_rows() {
            let (cols, vals) = x.row(r);
            let row = out.row_mut(r);
            for (&c, &v) in cols.iter().zip(vals) {
                for (k, o) in row.iter_mut().enumerate() {
                    *o += v * self.vt[(k, c)];
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LsaSvmModel {
    pub lsa: LsaModel,
    pub svm: LinearSvmModel,
}

impl LsaSvmModel {
    pub fn fit(x: &CsrMatrix, y: &[bool], d: usize, svm: SvmParams, seed: u64) -> Result<Self> {
        crate::models::check_training_labels(x, y)?;
        let lsa = LsaModel::fit(x, d, seed)?;
        Self::from_projection(lsa, x, y, svm)
    }

    /// Fits the SVM on top of an existing projection, truncated to its
    /// leading components.
    pub fn from_projection(lsa: LsaModel, x: &CsrMatrix, y: &[bool], svm: SvmParams) -> Result<Self> {
        let features = CsrMatrix::from_dense(&lsa.transform(x)?);
        let svm = LinearSvmModel::fit(&features, y, svm)?;
        Ok(Self { lsa, svm })
    }
}

impl Scorer for LsaSvmModel {
    fn score(&self, x: &CsrMatrix) -> Result<Vec<f64>> {
        self.svm.score(&CsrMatrix::from_dense(&self.lsa.transform(x)?))
    }

    fn default_threshold(&self) -> f64 {
        0.0
    }
}

impl LsaModel {
    /// Keeps only the leading `d` components.
    pub fn truncated(&self, d: usize) -> Result<Self> {
        if d == 0 || d > self.rank() {
            return Err(Error::RankDeficient { requested: d, achievable: self.rank() });
        }
        Ok(Self { s: self.s[..d].to_vec(), vt: self.vt.truncate_rows(d) })
    }
}
