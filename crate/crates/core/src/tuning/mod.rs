//! Hyperparameter search: exhaustive grids, Gaussian-process Bayesian
//! optimization, random-forest feature elimination and the classification
//! threshold sweep.

mod bayes;
mod elimination;
mod gp;
pub mod spaces;
mod threshold;

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

pub use bayes::{bayes_opt, BayesParams};
pub use elimination::{feature_eliminate, EliminationMode, EliminationPlan, EliminationResult, Ranked};
pub use threshold::{threshold_sweep, ThresholdChoice};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    /// Members in the order they are enumerated.
    Discrete(Vec<f64>),
    Interval { lo: f64, hi: f64, scale: Scale },
}

impl Domain {
    pub fn linear(lo: f64, hi: f64) -> Self {
        Domain::Interval { lo, hi, scale: Scale::Linear }
    }

    pub fn log(lo: f64, hi: f64) -> Self {
        Domain::Interval { lo, hi, scale: Scale::Log }
    }

    fn validate(&self, name: &str) -> Result<()> {
        match self {
            Domain::Discrete(v) if v.is_empty() => Err(Error::Config(format!("{name}: empty set"))),
            Domain::Discrete(v) if v.iter().any(|x| !x.is_finite()) => {
                Err(Error::Config(format!("{name}: non-finite member")))
            }
            Domain::Interval { lo, hi, scale } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    Err(Error::Config(format!("{name}: interval needs finite lo < hi")))
                } else if *scale == Scale::Log && *lo <= 0.0 {
                    Err(Error::Config(format!("{name}: log scale needs lo > 0")))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Maps `u ∈ [0, 1]` into the domain. Finite sets are spread evenly
    /// over the unit interval by position and rounded to the nearest one.
    pub fn from_unit(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            Domain::Discrete(v) => v[Self::member_index(v.len(), u)],
            Domain::Interval { lo, hi, scale: Scale::Linear } => lo + u * (hi - lo),
            Domain::Interval { lo, hi, scale: Scale::Log } => (lo.ln() + u * (hi.ln() - lo.ln())).exp().clamp(*lo, *hi),
        }
    }

    /// Snaps `u` to the unit coordinate of the value it maps to.
    pub fn snap_unit(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            Domain::Discrete(v) if v.len() == 1 => 0.0,
            Domain::Discrete(v) => Self::member_index(v.len(), u) as f64 / (v.len() - 1) as f64,
            Domain::Interval { .. } => u,
        }
    }

    fn member_index(k: usize, u: f64) -> usize {
        if k == 1 {
            0
        } else {
            ((u * (k - 1) as f64).round() as usize).min(k - 1)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub domain: Domain,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    params: Vec<Param>,
}

/// Parameter values by name.
pub type Assignment = BTreeMap<String, f64>;

impl SearchSpace {
    pub fn new(params: Vec<Param>) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::Config("search space has no parameters".into()));
        }
        for (i, p) in params.iter().enumerate() {
            p.domain.validate(&p.name)?;
            if params[..i].iter().any(|q| q.name == p.name) {
                return Err(Error::Config(format!("duplicate parameter {}", p.name)));
            }
        }
        Ok(Self { params })
    }

    /// Builds a space from `(name, domain)` pairs.
    pub fn of(params: impl IntoIterator<Item = (&'static str, Domain)>) -> Result<Self> {
        Self::new(params.into_iter().map(|(n, d)| Param { name: n.to_string(), domain: d }).collect())
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| matches!(p.domain, Domain::Discrete(_)))
    }

    /// Number of grid points, if every domain is finite.
    pub fn grid_size(&self) -> Option<usize> {
        self.params
            .iter()
            .map(|p| match &p.domain {
                Domain::Discrete(v) => Some(v.len()),
                Domain::Interval { .. } => None,
            })
            .product()
    }

    fn assignment_from_unit(&self, u: &[f64]) -> Assignment {
        self.params.iter().zip(u).map(|(p, &x)| (p.name.clone(), p.domain.from_unit(x))).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub point: Assignment,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best: Assignment,
    pub best_error: f64,
    /// Every evaluation in the order it was made.
    pub log: Vec<Evaluation>,
}

impl TuneResult {
    /// First evaluation with the lowest error.
    fn from_log(log: Vec<Evaluation>) -> Result<Self> {
        let mut best: Option<&Evaluation> = None;
        for e in &log {
            if best.is_none_or(|b| e.error < b.error) {
                best = Some(e);
            }
        }
        let best = best.ok_or_else(|| Error::invalid("no evaluations"))?;
        Ok(Self { best: best.point.clone(), best_error: best.error, log: log.clone() })
    }
}

/// Evaluates every point of a finite space in lexicographic order (the
/// last parameter varies fastest). A failing point scores `+∞`.
pub fn grid_search<F>(space: &SearchSpace, mut objective: F) -> Result<TuneResult>
where
    F: FnMut(&Assignment) -> Result<f64>,
{
    let sets: Vec<&Vec<f64>> = space
        .params
        .iter()
        .map(|p| match &p.domain {
            Domain::Discrete(v) => Ok(v),
            Domain::Interval { .. } => Err(Error::Config(format!("{}: grid search needs a finite set", p.name))),
        })
        .collect::<Result<_>>()?;
    let mut index = vec![0usize; sets.len()];
    let mut log = Vec::new();
    'outer: loop {
        let point: Assignment =
            space.params.iter().zip(sets.iter().zip(&index)).map(|(p, (s, &i))| (p.name.clone(), s[i])).collect();
        let error = match objective(&point) {
            Ok(e) if !e.is_nan() => e,
            _ => f64::INFINITY,
        };
        log.push(Evaluation { point, error });
        for k in (0..index.len()).rev() {
            index[k] += 1;
            if index[k] < sets[k].len() {
                continue 'outer;
            }
            index[k] = 0;
        }
        break;
    }
    TuneResult::from_log(log)
}

/// Writes `iteration,<params...>,error` rows, iterations counted from 1.
pub fn write_tuning_log<W: Write>(out: W, space: &SearchSpace, result: &TuneResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["iteration".to_string()];
    header.extend(space.params.iter().map(|p| p.name.clone()));
    header.push("error".into());
    w.write_record(&header)?;
    for (i, e) in result.log.iter().enumerate() {
        let mut row = vec![(i + 1).to_string()];
        row.extend(space.params.iter().map(|p| e.point.get(&p.name).map_or(String::new(), |v| v.to_string())));
        row.push(e.error.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
