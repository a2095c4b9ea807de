//! Confusion counts and the rates derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// Documents called positive.
    pub fn n_pos(&self) -> usize {
        self.tp + self.fp
    }

    /// Documents that are positive.
    pub fn n_true_pos(&self) -> usize {
        self.tp + self.fn_
    }

    /// Called minus actual positives.
    pub fn diff_pos(&self) -> i64 {
        self.n_pos() as i64 - self.n_true_pos() as i64
    }
}

pub fn confusion(y_true: &[bool], y_pred: &[bool]) -> Result<Confusion> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch { expected: y_true.len(), found: y_pred.len() });
    }
    let mut c = Confusion::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (true, true) => c.tp += 1,
            (false, true) => c.fp += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// Rates in percent; `None` where the denominator is zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub sens: Option<f64>,
    pub spec: Option<f64>,
    pub ppv: Option<f64>,
    pub npv: Option<f64>,
    pub f1: Option<f64>,
    pub acc: Option<f64>,
    pub n_pos: usize,
    pub diff_pos: i64,
}

fn pct(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| 100.0 * num as f64 / den as f64)
}

pub fn metrics(c: &Confusion) -> MetricRow {
    let sens = pct(c.tp, c.tp + c.fn_);
    let ppv = pct(c.tp, c.tp + c.fp);
    let f1 = match (sens, ppv) {
        (Some(s), Some(p)) if s + p > 0.0 => Some(2.0 * s * p / (s + p)),
        (Some(_), Some(_)) => Some(0.0),
        _ => None,
    };
    MetricRow {
        sens,
        spec: pct(c.tn, c.tn + c.fp),
        ppv,
        npv: pct(c.tn, c.tn + c.fn_),
        f1,
        acc: pct(c.tp + c.tn, c.total()),
        n_pos: c.n_pos(),
        diff_pos: c.diff_pos(),
    }
}
