use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::models::{check_features, check_training_labels, Scorer};

/// Tuned additive smoothing for the multinomial model.
pub const DEFAULT_MNB_ALPHA: f64 = 0.032683;

/// Multinomial naive Bayes. Index 0 is the negative class, 1 the positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MnbModel {
    pub alpha: f64,
    pub class_log_prior: [f64; 2],
    pub feature_log_prob: [Vec<f64>; 2],
}

impl MnbModel {
    /// `θ_cw = (α + n_cw) / (α V + n_c)`; priors are class frequencies.
    pub fn fit(x: &CsrMatrix, y: &[bool], alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!("smoothing must be positive, got {alpha}")));
        }
        check_training_labels(x, y)?;
        let v = x.n_cols();
        let mut counts = [vec![0.0; v], vec![0.0; v]];
        let mut docs = [0usize; 2];
        for (r, &label) in y.iter().enumerate() {
            let c = label as usize;
            docs[c] += 1;
            let (cols, vals) = x.row(r);
            for (&j, &val) in cols.iter().zip(vals) {
                counts[c][j] += val;
            }
        }
        let n = y.len() as f64;
        let class_log_prior = [(docs[0] as f64 / n).ln(), (docs[1] as f64 / n).ln()];
        let feature_log_prob = counts.map(|row| {
            let total: f64 = row.iter().sum();
            let denom = (alpha * v as f64 + total).ln();
            row.iter().map(|&c| (alpha + c).ln() - denom).collect()
        });
        Ok(Self { alpha, class_log_prior, feature_log_prob })
    }

    /// Joint log-likelihood of each class, up to the shared multinomial
    /// coefficient.
    pub fn joint_log_likelihood(&self, x: &CsrMatrix) -> Result<Vec<[f64; 2]>> {
        check_features(self.feature_log_prob[0].len(), x)?;
        Ok((0..x.n_rows())
            .map(|r| {
                let (cols, vals) = x.row(r);
                let mut jll = self.class_log_prior;
                for (&j, &val) in cols.iter().zip(vals) {
                    jll[0] += val * self.feature_log_prob[0][j];
                    jll[1] += val * self.feature_log_prob[1][j];
                }
                jll
            })
            .collect())
    }

    /// Normalized class posteriors `[P(neg | x), P(pos | x)]`.
    pub fn posteriors(&self, x: &CsrMatrix) -> Result<Vec<[f64; 2]>> {
        Ok(self
            .joint_log_likelihood(x)?
            .into_iter()
            .map(|[l0, l1]| {
                let m = l0.max(l1);
                let (e0, e1) = ((l0 - m).exp(), (l1 - m).exp());
                [e0 / (e0 + e1), e1 / (e0 + e1)]
            })
            .collect())
    }
}

impl Scorer for MnbModel {
    fn score(&self, x: &CsrMatrix) -> Result<Vec<f64>> {
        Ok(self.posteriors(x)?.into_iter().map(|p| p[1]).collect())
    }

    fn default_threshold(&self) -> f64 {
        0.5
    }
}
