//! Importance-based feature elimination for the random forest.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::models::{RandomForestModel, Scorer};

/// A fitted model that ranks its input features.
pub trait Ranked: Scorer {
    /// Feature indices by decreasing importance.
    fn ranking(&self) -> Vec<usize>;
}

impl Ranked for RandomForestModel {
    fn ranking(&self) -> Vec<usize> {
        self.ranked_features()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EliminationMode {
    /// Refit and re-rank after every step down.
    Recursive,
    /// Rank once from the initial fit.
    Nonrecursive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EliminationPlan {
    /// Size of the initial importance trim.
    pub start: usize,
    pub min: usize,
    pub max: usize,
    pub step: usize,
}

impl Default for EliminationPlan {
    fn default() -> Self {
        Self { start: 250, min: 10, max: 200, step: 10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EliminationResult {
    pub n_top: usize,
    /// Original column indices kept at `n_top`, most important first.
    pub features: Vec<usize>,
    /// The initial trim, most important first.
    pub initial: Vec<usize>,
    /// `(n_top, validation accuracy)` in evaluation order.
    pub log: Vec<(usize, f64)>,
}

fn accuracy<M: Scorer>(m: &M, x: &CsrMatrix, y: &[bool]) -> Result<f64> {
    let pred = m.predict(x, m.default_threshold())?;
    Ok(pred.iter().zip(y).filter(|(p, t)| p == t).count() as f64 / y.len() as f64)
}

/// Chooses how many top-ranked features to keep by validation accuracy.
/// Ties go to the smaller count.
pub fn feature_eliminate<M, F>(
    mut fit: F,
    train: (&CsrMatrix, &[bool]),
    val: (&CsrMatrix, &[bool]),
    mode: EliminationMode,
    plan: EliminationPlan,
) -> Result<EliminationResult>
where
    M: Ranked,
    F: FnMut(&CsrMatrix, &[bool]) -> Result<M>,
{
    let (x, y) = train;
    let (xv, yv) = val;
    if plan.min == 0 || plan.step == 0 || plan.min > plan.max {
        return Err(Error::Config("elimination range must satisfy 0 < min <= max with a positive step".into()));
    }
    if x.n_cols() != xv.n_cols() {
        return Err(Error::DimensionMismatch { expected: x.n_cols(), found: xv.n_cols() });
    }
    if yv.is_empty() || xv.n_rows() != yv.len() {
        return Err(Error::DimensionMismatch { expected: xv.n_rows(), found: yv.len() });
    }
    if x.n_cols() < plan.min {
        return Err(Error::InvalidInput(format!("{} features available, at least {} needed", x.n_cols(), plan.min)));
    }

    let full = fit(x, y)?;
    let initial: Vec<usize> = full.ranking().into_iter().take(plan.start.min(x.n_cols())).collect();
    if initial.len() < plan.min {
        return Err(Error::InvalidInput(format!("{} features after trim, at least {} needed", initial.len(), plan.min)));
    }
    let top = plan.max.min(initial.len());
    let sizes: Vec<usize> = (plan.min..=top).step_by(plan.step).collect();

    let mut log = Vec::with_capacity(sizes.len());
    let mut kept: Vec<(usize, Vec<usize>)> = Vec::with_capacity(sizes.len());
    match mode {
        EliminationMode::Nonrecursive => {
            for &k in &sizes {
                let features = initial[..k].to_vec();
                let m = fit(&x.select_cols(&features), y)?;
                log.push((k, accuracy(&m, &xv.select_cols(&features), yv)?));
                kept.push((k, features));
            }
        }
        EliminationMode::Recursive => {
            let mut current = initial.clone();
            let mut model = fit(&x.select_cols(&current), y)?;
            for &k in sizes.iter().rev() {
                current = model.ranking().into_iter().take(k).map(|j| current[j]).collect();
                model = fit(&x.select_cols(&current), y)?;
                log.push((k, accuracy(&model, &xv.select_cols(&current), yv)?));
                kept.push((k, current.clone()));
            }
        }
    }

    let mut best: Option<(usize, f64)> = None;
    for &(k, acc) in &log {
        if best.is_none_or(|(bk, ba)| acc > ba || (acc == ba && k < bk)) {
            best = Some((k, acc));
        }
    }
    let (n_top, _) = best.expect("at least one candidate size");
    let features = kept.into_iter().find(|(k, _)| *k == n_top).map(|(_, f)| f).expect("size was evaluated");
    Ok(EliminationResult { n_top, features, initial, log })
}
