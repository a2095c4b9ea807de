//! Accuracy-maximizing cutoff over the grid 0.01, 0.02, ..., 0.99.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdChoice {
    pub cutoff: f64,
    pub accuracy: f64,
}

/// Positive means `score >= cutoff`. Ties go to the cutoff closest to 0.5,
/// then to the smaller one.
pub fn threshold_sweep(scores: &[f64], labels: &[bool]) -> Result<ThresholdChoice> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: scores.len(), found: labels.len() });
    }
    if scores.is_empty() {
        return Err(Error::invalid("no scores to sweep"));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::invalid("scores must not be NaN"));
    }
    let mut best: Option<(usize, usize)> = None;
    for k in 1..=99usize {
        let t = k as f64 / 100.0;
        let correct = scores.iter().zip(labels).filter(|&(&s, &y)| (s >= t) == y).count();
        let better = match best {
            None => true,
            Some((bk, bc)) => correct > bc || (correct == bc && k.abs_diff(50) < bk.abs_diff(50)),
        };
        if better {
            best = Some((k, correct));
        }
    }
    let (k, correct) = best.expect("the grid is nonempty");
    Ok(ThresholdChoice { cutoff: k as f64 / 100.0, accuracy: correct as f64 / scores.len() as f64 })
}
