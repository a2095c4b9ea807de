//! Linear SVM with squared hinge loss and an L2 penalty, trained in the
//! primal by truncated Newton steps with a backtracking line search.
//!
//! Objective: `½‖w‖² + C Σ max(0, 1 − yᵢ(w·xᵢ + b))²`. The bias is not
//! penalized. Newton systems use the generalized Hessian
//! `I + 2C Σ_active [xᵢ; 1][xᵢ; 1]ᵀ` and are solved by conjugate gradients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::models::{check_features, check_training_labels, Scorer};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub fit_intercept: bool,
    /// Stop when the relative objective decrease of an iteration falls
    /// below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl SvmParams {
    pub fn with_c(c: f64) -> Self {
        Self { c, ..Self::default() }
    }
}

impl Default for SvmParams {
    fn default() -> Self {
        Self { c: 1.0, fit_intercept: true, tol: 1e-8, max_iter: 200 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmModel {
    pub params: SvmParams,
    pub w: Vec<f64>,
    pub b: f64,
    /// Objective after each iteration, starting with the value at `w = 0`.
    pub objective_history: Vec<f64>,
}

impl LinearSvmModel {
    pub fn fit(x: &CsrMatrix, y: &[bool], params: SvmParams) -> Result<Self> {
        if !(params.c > 0.0 && params.c.is_finite()) {
            return Err(Error::invalid(format!("C must be positive, got {}", params.c)));
        }
        check_training_labels(x, y)?;
        let problem = Problem { x, y: y.iter().map(|&v| if v { 1.0 } else { -1.0 }).collect(), params };
        let (w, b, history) = problem.solve()?;
        Ok(Self { params, w, b, objective_history: history })
    }

    pub fn objective(&self) -> f64 {
        *self.objective_history.last().expect("history starts at w = 0")
    }

    pub fn decision_function(&self, x: &CsrMatrix) -> Result<Vec<f64>> {
        check_features(self.w.len(), x)?;
        Ok(x.spmv(&self.w)?.into_iter().map(|m| m + self.b).collect())
    }
}

impl Scorer for LinearSvmModel {
    fn score(&self, x: &CsrMatrix) -> Result<Vec<f64>> {
        self.decision_function(x)
    }

    fn default_threshold(&self) -> f64 {
        0.0
    }
}

/// The squared-hinge objective at (w, b), exposed for independent checks.
pub fn squared_hinge_objective(x: &CsrMatrix, y: &[bool], c: f64, w: &[f64], b: f64) -> Result<f64> {
    let margins = x.spmv(w)?;
    let loss: f64 = margins
        .iter()
        .zip(y)
        .map(|(&m, &label)| {
            let s = if label { 1.0 } else { -1.0 };
            let xi = 1.0 - s * (m + b);
            if xi > 0.0 { xi * xi } else { 0.0 }
        })
        .sum();
    Ok(0.5 * w.iter().map(|v| v * v).sum::<f64>() + c * loss)
}

struct Problem<'a> {
    x: &'a CsrMatrix,
    y: Vec<f64>,
    params: SvmParams,
}

impl Problem<'_> {
    fn objective(&self, w: &[f64], outputs: &[f64]) -> f64 {
        let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
        let loss: f64 = outputs
            .iter()
            .zip(&self.y)
            .map(|(&o, &y)| {
                let xi = 1.0 - y * o;
                if xi > 0.0 { xi * xi } else { 0.0 }
            })
            .sum();
        reg + self.params.c * loss
    }

    fn solve(&self) -> Result<(Vec<f64>, f64, Vec<f64>)> {
        let n = self.y.len();
        let p = self.x.n_cols();
        let c = self.params.c;
        let mut w = vec![0.0; p];
        let mut b = 0.0;
        let mut outputs = vec![0.0; n];
        let mut f = self.objective(&w, &outputs);
        let mut history = vec![f];

        for _ in 0..self.params.max_iter {
            // active set and gradient
            let active: Vec<usize> = (0..n).filter(|&i| self.y[i] * outputs[i] < 1.0).collect();
            let mut coef = vec![0.0; n];
            for &i in &active {
                coef[i] = -2.0 * c * self.y[i] * (1.0 - self.y[i] * outputs[i]);
            }
            let mut gw = self.x.spmtv(&coef)?;
            for (g, wi) in gw.iter_mut().zip(&w) {
                *g += wi;
            }
            let gb = if self.params.fit_intercept { coef.iter().sum::<f64>() } else { 0.0 };
            let gnorm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
            if gnorm == 0.0 {
                break;
            }

            let (dw, db) = self.newton_direction(&active, &gw, gb)?;

            // backtracking on the exact objective along the direction
            let dz: Vec<f64> = self.x.spmv(&dw)?.into_iter().map(|z| z + db).collect();
            let slope: f64 = gw.iter().zip(&dw).map(|(g, d)| g * d).sum::<f64>() + gb * db;
            if slope >= 0.0 {
                break;
            }
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..60 {
                let w_new: Vec<f64> = w.iter().zip(&dw).map(|(wi, di)| wi + t * di).collect();
                let o_new: Vec<f64> = outputs.iter().zip(&dz).map(|(o, z)| o + t * z).collect();
                let f_new = self.objective(&w_new, &o_new);
                if f_new <= f + 1e-4 * t * slope {
                    accepted = Some((w_new, o_new, f_new));
                    break;
                }
                t *= 0.5;
            }
            let Some((w_new, o_new, f_new)) = accepted else { break };
            let decrease = f - f_new;
            w = w_new;
            outputs = o_new;
            b += t * db;
            f = f_new;
            history.push(f);
            if decrease <= self.params.tol * f.abs().max(f64::MIN_POSITIVE) {
                break;
            }
        }
        Ok((w, b, history))
    }

    /// Conjugate gradients on `H d = −g` with the generalized Hessian.
    fn newton_direction(&self, active: &[usize], gw: &[f64], gb: f64) -> Result<(Vec<f64>, f64)> {
        let p = gw.len();
        let c2 = 2.0 * self.params.c;
        let fit_b = self.params.fit_intercept;
        let n = self.y.len();
        let hess = |vw: &[f64], vb: f64| -> Result<(Vec<f64>, f64)> {
            let xv = self.x.spmv(vw)?;
            let mut u = vec![0.0; n];
            let mut hb = 0.0;
            for &i in active {
                let s = xv[i] + if fit_b { vb } else { 0.0 };
                u[i] = c2 * s;
                hb += c2 * s;
            }
            let mut hw = self.x.spmtv(&u)?;
            for (h, v) in hw.iter_mut().zip(vw) {
                *h += v;
            }
            // tiny damping keeps the bias block definite when no point is active
            let hb = if fit_b { hb + 1e-12 * vb } else { 0.0 };
            Ok((hw, hb))
        };

        let mut dw = vec![0.0; p];
        let mut db = 0.0;
        let mut rw: Vec<f64> = gw.iter().map(|g| -g).collect();
        let mut rb = -gb;
        let mut pw = rw.clone();
        let mut pb = rb;
        let mut rr = rw.iter().map(|r| r * r).sum::<f64>() + rb * rb;
        let g_norm = rr.sqrt();
        let target = (0.1 * g_norm).min(g_norm.sqrt() * g_norm).max(1e-14 * g_norm);
        for _ in 0..500 {
            if rr.sqrt() <= target {
                break;
            }
            let (hw, hb) = hess(&pw, pb)?;
            let php = pw.iter().zip(&hw).map(|(a, b)| a * b).sum::<f64>() + pb * hb;
            if php <= 0.0 {
                break;
            }
            let alpha = rr / php;
            for i in 0..p {
                dw[i] += alpha * pw[i];
                rw[i] -= alpha * hw[i];
            }
            db += alpha * pb;
            rb -= alpha * hb;
            let rr_new = rw.iter().map(|r| r * r).sum::<f64>() + rb * rb;
            let beta = rr_new / rr;
            for i in 0..p {
                pw[i] = rw[i] + beta * pw[i];
            }
            pb = rb + beta * pb;
            rr = rr_new;
        }
        if !fit_b {
            db = 0.0;
        }
        Ok((dw, db))
    }
}
