//! SVM over naive-Bayes-scaled binary features, with interpolation of the
//! learned weights toward their mean magnitude.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::models::{check_features, check_training_labels, LinearSvmModel, Scorer, SvmParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NbsvmParams {
    /// Smoothing added to each feature count.
    pub alpha: f64,
    /// Interpolation weight; 1 keeps the SVM weights unchanged.
    pub beta: f64,
    pub c: f64,
}

impl Default for NbsvmParams {
    fn default() -> Self {
        Self { alpha: 1.0, beta: 1.0, c: 0.001 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NbsvmModel {
    pub params: NbsvmParams,
    /// Log-count ratio applied to every input feature.
    pub r: Vec<f64>,
    /// Raw SVM weights on the scaled features.
    pub svm_w: Vec<f64>,
    /// Interpolated weights used for scoring.
    pub w: Vec<f64>,
    pub b: f64,
}

/// `r = ln((p / ‖p‖₁) / (q / ‖q‖₁))` with `p = α + Σ_pos xᵢ`,
/// `q = α + Σ_neg xᵢ`.
pub fn log_count_ratio(x: &CsrMatrix, y: &[bool], alpha: f64) -> Vec<f64> {
    let v = x.n_cols();
    let mut p = vec![alpha; v];
    let mut q = vec![alpha; v];
    for (r, &label) in y.iter().enumerate() {
        let target = if label { &mut p } else { &mut q };
        let (cols, vals) = x.row(r);
        for (&j, &val) in cols.iter().zip(vals) {
            target[j] += val;
        }
    }
    let (p1, q1): (f64, f64) = (p.iter().sum(), q.iter().sum());
    p.iter().zip(&q).map(|(&pj, &qj)| ((pj / p1) / (qj / q1)).ln()).collect()
}

impl NbsvmModel {
    pub fn fit(x: &CsrMatrix, y: &[bool], params: NbsvmParams) -> Result<Self> {
        if x.values().iter().any(|&v| v != 1.0) {
            return Err(Error::invalid("NB-SVM requires a binarized matrix"));
        }
        if params.alpha.is_nan() || params.alpha <= 0.0 || !(0.0..=1.0).contains(&params.beta) {
            return Err(Error::invalid("NB-SVM needs alpha > 0 and beta in [0, 1]"));
        }
        check_training_labels(x, y)?;
        let r = log_count_ratio(x, y, params.alpha);
        let scaled = scale(x, &r);
        let svm = LinearSvmModel::fit(&scaled, y, SvmParams::with_c(params.c))?;
        let w = interpolate(&svm.w, params.beta);
        Ok(Self { params, r, svm_w: svm.w, w, b: svm.b })
    }
}

fn scale(x: &CsrMatrix, r: &[f64]) -> CsrMatrix {
    x.map_values(|_, j, v| v * r[j])
}

/// `(1 − β) w̄ + β w` with `w̄` the mean absolute weight.
fn interpolate(w: &[f64], beta: f64) -> Vec<f64> {
    if beta == 1.0 {
        return w.to_vec();
    }
    let mean_abs = w.iter().map(|v| v.abs()).sum::<f64>() / w.len().max(1) as f64;
    w.iter().map(|&wj| (1.0 - beta) * mean_abs + beta * wj).collect()
}

impl Scorer for NbsvmModel {
    fn score(&self, x: &CsrMatrix) -> Result<Vec<f64>> {
        check_features(self.r.len(), x)?;
        let scaled = scale(x, &self.r);
        Ok(scaled.spmv(&self.w)?.into_iter().map(|m| m + self.b).collect())
    }

    fn default_threshold(&self) -> f64 {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_case_ratio() {
        // V = {a, b}; two positives contain a, two negatives contain b
        let x = CsrMatrix::from_rows(2, vec![vec![(0, 1.0)], vec![(0, 1.0)], vec![(1, 1.0)], vec![(1, 1.0)]]).unwrap();
        let r = log_count_ratio(&x, &[true, true, false, false], 1.0);
        assert!((r[0] - 3f64.ln()).abs() < 1e-12);
        assert!((r[1] + 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn symmetric_classes_give_zero_ratio() {
        let x = CsrMatrix::from_rows(2, vec![vec![(0, 1.0)], vec![(1, 1.0)], vec![(0, 1.0)], vec![(1, 1.0)]]).unwrap();
        let r = log_count_ratio(&x, &[true, true, false, false], 1.0);
        assert!(r.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn rejects_counts() {
        let x = CsrMatrix::from_rows(1, vec![vec![(0, 2.0)], vec![(0, 1.0)]]).unwrap();
        assert!(NbsvmModel::fit(&x, &[true, false], NbsvmParams::default()).is_err());
    }

    #[test]
    fn interpolation_endpoints() {
        let w = [1.0, -3.0, -0.0];
        assert_eq!(interpolate(&w, 1.0), w.to_vec());
        assert_eq!(interpolate(&w, 0.0), vec![4.0 / 3.0; 3]);
    }
}
