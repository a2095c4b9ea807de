//! Repeated fit/evaluate cycles over seeded splits and comparison against
//! the best model.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::pipeline::{fit_pipeline, FeatureViews, ModelConfig};
use crate::harness::split::{split, Split, SplitPlan};
use crate::seed::derive_seed;
use crate::stats::{benjamini_yekutieli, confusion, metrics, wilcoxon_one_sample, wilcoxon_paired, Confusion, MetricRow};

/// One model evaluated on one split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub split: usize,
    pub seed: u64,
    pub confusion: Confusion,
    pub metrics: MetricRow,
    pub seconds: f64,
}

/// Means over the splits where a rate is defined.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub sens: Option<f64>,
    pub spec: Option<f64>,
    pub ppv: Option<f64>,
    pub npv: Option<f64>,
    pub f1: Option<f64>,
    pub acc: Option<f64>,
    pub fp: f64,
    pub fn_: f64,
    pub n_pos: f64,
    pub diff_pos: f64,
}

/// Running mean; exact when every value is the same.
fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut m = 0.0;
    for (k, v) in values.into_iter().enumerate() {
        m += (v - m) / (k + 1) as f64;
    }
    m
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelOutcome {
    pub config: ModelConfig,
    /// Cells in split order; empty if the model failed.
    pub cells: Vec<Cell>,
    /// First error met, which voids the model's column.
    pub failure: Option<String>,
}

impl ModelOutcome {
    pub fn name(&self) -> &str {
        &self.config.name
    }

    pub fn summary(&self) -> Option<Summary> {
        if self.failure.is_some() || self.cells.is_empty() {
            return None;
        }
        let rate = |f: fn(&MetricRow) -> Option<f64>| {
            let v: Vec<f64> = self.cells.iter().filter_map(|c| f(&c.metrics)).collect();
            (!v.is_empty()).then(|| mean(v.iter().copied()))
        };
        let cell_mean = |f: fn(&Cell) -> f64| mean(self.cells.iter().map(f));
        Some(Summary {
            sens: rate(|m| m.sens),
            spec: rate(|m| m.spec),
            ppv: rate(|m| m.ppv),
            npv: rate(|m| m.npv),
            f1: rate(|m| m.f1),
            acc: rate(|m| m.acc),
            fp: cell_mean(|c| c.confusion.fp as f64),
            fn_: cell_mean(|c| c.confusion.fn_ as f64),
            n_pos: cell_mean(|c| c.metrics.n_pos as f64),
            diff_pos: cell_mean(|c| c.metrics.diff_pos as f64),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub plan: SplitPlan,
    pub models: Vec<ModelOutcome>,
}

fn run_cell(model: &ModelConfig, index: usize, views: &FeatureViews, s: &Split, split_seed: u64) -> Result<Cell> {
    let start = Instant::now();
    let fitted = fit_pipeline(&model.spec, views, &s.train, &s.val, derive_seed(split_seed, index as u64))?;
    let pred = fitted.predict(views, &s.test)?;
    let c = confusion(&views.labels_of(&s.test), &pred)?;
    Ok(Cell { split: 0, seed: split_seed, confusion: c, metrics: metrics(&c), seconds: start.elapsed().as_secs_f64() })
}

/// Fits every model on the training part of every split and scores the
/// test part. Cells run in parallel; results are ordered by model and
/// split. A failing cell voids its model's column without stopping the
/// others.
pub fn run_experiment(views: &FeatureViews, models: &[ModelConfig], plan: &SplitPlan) -> Result<ExperimentResult> {
    plan.validate()?;
    let splits: Vec<Split> = plan
        .seeds
        .iter()
        .map(|&seed| split(&views.labels, seed, plan.fractions, plan.stratify))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> =
        (0..models.len()).flat_map(|m| (0..splits.len()).map(move |s| (m, s))).collect();
    let results: Vec<Result<Cell>> = jobs
        .par_iter()
        .map(|&(m, s)| {
            run_cell(&models[m], m, views, &splits[s], plan.seeds[s]).map(|mut c| {
                c.split = s;
                c
            })
        })
        .collect();

    let mut outcomes: Vec<ModelOutcome> =
        models.iter().map(|c| ModelOutcome { config: c.clone(), cells: Vec::new(), failure: None }).collect();
    for (&(m, s), r) in jobs.iter().zip(results) {
        let o = &mut outcomes[m];
        match r {
            Ok(cell) if o.failure.is_none() => o.cells.push(cell),
            Ok(_) => {}
            Err(e) => {
                if o.failure.is_none() {
                    o.failure = Some(format!("split {s} (seed {}): {e}", plan.seeds[s]));
                }
                o.cells.clear();
            }
        }
    }
    Ok(ExperimentResult { plan: plan.clone(), models: outcomes })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompareMetric {
    Accuracy,
    DiffPos,
}

impl CompareMetric {
    fn value(&self, c: &Cell) -> f64 {
        match self {
            CompareMetric::Accuracy => c.metrics.acc.unwrap_or(f64::NAN),
            CompareMetric::DiffPos => c.metrics.diff_pos as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: String,
    pub mean: f64,
    pub is_referent: bool,
    /// Paired test against the referent; `None` for the referent itself.
    pub raw_p: Option<f64>,
    pub adjusted_p: Option<f64>,
    /// Test of the model's `diff_pos` values being centred on zero.
    pub diff_pos_p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub metric: CompareMetric,
    pub referent: String,
    pub alpha: f64,
    /// Rows in model order; failed models are left out.
    pub rows: Vec<ComparisonRow>,
}

/// Picks the referent (highest mean accuracy, or smallest absolute mean
/// `diff_pos`; ties to the earlier model) and tests every other model
/// against it across splits, adjusting with Benjamini–Yekutieli.
pub fn compare_models(result: &ExperimentResult, metric: CompareMetric) -> Result<ComparisonTable> {
    let ok: Vec<&ModelOutcome> = result.models.iter().filter(|m| m.failure.is_none()).collect();
    if ok.len() < 2 {
        return Err(Error::invalid("comparison needs at least two successful models"));
    }
    let n_splits = ok[0].cells.len();
    if n_splits < 2 {
        return Err(Error::invalid("comparison needs at least two splits"));
    }
    let values: Vec<Vec<f64>> = ok.iter().map(|m| m.cells.iter().map(|c| metric.value(c)).collect()).collect();
    if values.iter().flatten().any(|v| v.is_nan()) {
        return Err(Error::invalid("a compared metric is undefined on some split"));
    }
    let means: Vec<f64> = values.iter().map(|v| mean(v.iter().copied())).collect();
    let key = |m: f64| match metric {
        CompareMetric::Accuracy => -m,
        CompareMetric::DiffPos => m.abs(),
    };
    let mut referent = 0;
    for i in 1..means.len() {
        if key(means[i]) < key(means[referent]) {
            referent = i;
        }
    }

    let mut raw = Vec::new();
    for (i, v) in values.iter().enumerate() {
        if i != referent {
            raw.push(wilcoxon_paired(&values[referent], v)?.p_value);
        }
    }
    let adjusted = benjamini_yekutieli(&raw)?;
    let mut k = 0;
    let mut rows = Vec::with_capacity(ok.len());
    for (i, m) in ok.iter().enumerate() {
        let diffs: Vec<f64> = m.cells.iter().map(|c| c.metrics.diff_pos as f64).collect();
        let (raw_p, adjusted_p) = if i == referent {
            (None, None)
        } else {
            k += 1;
            (Some(raw[k - 1]), Some(adjusted[k - 1]))
        };
        rows.push(ComparisonRow {
            model: m.name().to_string(),
            mean: means[i],
            is_referent: i == referent,
            raw_p,
            adjusted_p,
            diff_pos_p: wilcoxon_one_sample(&diffs)?.p_value,
        });
    }
    Ok(ComparisonTable { metric, referent: ok[referent].name().to_string(), alpha: 0.05, rows })
}
