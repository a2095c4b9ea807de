//! The tuning stage: one dedicated split whose validation part picks each
//! model's hyperparameters.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::pipeline::{
    fit_pipeline, fit_trimmed_forest, FeatureViews, LdaSpec, LsaSpec, MnbSpec, ModelConfig, ModelSpec, NbsvmSpec,
    NnSpec, RfSpec, SvmSpec,
};
use crate::harness::split::{split, Fractions};
use crate::linalg::{CsrMatrix, DenseMatrix};
use crate::models::{LdaModel, LdaSvmModel, LsaModel, LsaSvmModel, RandomForestModel, RfParams, Scorer, SvmParams};
use crate::stats::confusion;
use crate::textprep::TfidfTransform;
use crate::tuning::{
    bayes_opt, feature_eliminate, grid_search, spaces, threshold_sweep, write_tuning_log, Assignment, BayesParams, EliminationMode,
    EliminationPlan, EliminationResult, SearchSpace, ThresholdChoice, TuneResult,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TuningOptions {
    /// Seed of the tuning split; must differ from the experiment seeds.
    pub seed: u64,
    /// Overrides every Bayesian-optimization budget when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bayes_iters: Option<usize>,
    /// Forest size used while eliminating features.
    pub rf_trees: usize,
    pub elimination: EliminationPlan,
}

impl Default for TuningOptions {
    fn default() -> Self {
        Self { seed: 0, bayes_iters: None, rf_trees: 1000, elimination: EliminationPlan::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchLog {
    pub space: SearchSpace,
    pub result: TuneResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TunedModel {
    pub config: ModelConfig,
    pub search: Option<SearchLog>,
    pub elimination: Vec<(EliminationMode, EliminationResult)>,
    pub threshold: Option<ThresholdChoice>,
}

fn val_error(pred: &[bool], truth: &[bool]) -> Result<f64> {
    let c = confusion(truth, pred)?;
    Ok((c.fp + c.fn_) as f64 / c.total().max(1) as f64)
}

/// Tunes each model on the split drawn with `opts.seed`.
pub fn tune_models(
    views: &FeatureViews,
    models: &[ModelConfig],
    fractions: Fractions,
    stratify: bool,
    opts: &TuningOptions,
) -> Result<Vec<TunedModel>> {
    let s = split(&views.labels, opts.seed, fractions, stratify)?;
    models.iter().map(|m| tune_model(m, views, &s.train, &s.val, opts)).collect()
}

pub fn tune_model(
    model: &ModelConfig,
    views: &FeatureViews,
    train: &[usize],
    val: &[usize],
    opts: &TuningOptions,
) -> Result<TunedModel> {
    let seed = opts.seed;
    let yv = views.labels_of(val);
    let generic = |spec: ModelSpec| -> Result<f64> {
        let p = fit_pipeline(&spec, views, train, val, seed)?;
        val_error(&p.predict(views, val)?, &yv)
    };
    let budget = |default: usize| opts.bayes_iters.unwrap_or(default);
    let bayes = |space: SearchSpace, iters: usize, build: &dyn Fn(&Assignment) -> ModelSpec| -> Result<(ModelSpec, SearchLog)> {
        let result = bayes_opt(&space, BayesParams::new(iters, seed), |a| generic(build(a)))?;
        Ok((build(&result.best), SearchLog { space, result }))
    };
    let done = |spec: ModelSpec, search: Option<SearchLog>| TunedModel {
        config: ModelConfig { name: model.name.clone(), spec },
        search,
        elimination: Vec::new(),
        threshold: None,
    };

    Ok(match model.spec {
        ModelSpec::Lda(base) => {
            let (spec, log) = tune_lda(base, views, train, val, seed)?;
            done(spec, Some(log))
        }
        ModelSpec::Lsa(_) => {
            let (spec, log) = tune_lsa(views, train, val, seed)?;
            done(spec, Some(log))
        }
        ModelSpec::Mnb(_) => {
            let (spec, log) = bayes(spaces::mnb(), budget(spaces::MNB_ITERS), &|a| ModelSpec::Mnb(MnbSpec { alpha: a["alpha"] }))?;
            done(spec, Some(log))
        }
        ModelSpec::Svm(_) => {
            let (spec, log) = bayes(spaces::svm(), budget(spaces::SVM_ITERS), &|a| ModelSpec::Svm(SvmSpec { c: a["c"] }))?;
            done(spec, Some(log))
        }
        ModelSpec::Nbsvm(base) => {
            let (spec, log) = bayes(spaces::nbsvm(), budget(spaces::NBSVM_ITERS), &|a| {
                ModelSpec::Nbsvm(NbsvmSpec { beta: a["beta"], c: a["c"], ..base })
            })?;
            done(spec, Some(log))
        }
        ModelSpec::NnSum(base) | ModelSpec::NnAvg(base) => {
            let sum = matches!(model.spec, ModelSpec::NnSum(_));
            let space = if sum { spaces::nn_sum() } else { spaces::nn_avg() };
            let (spec, log) = bayes(space, budget(spaces::NN_ITERS), &|a| {
                let nn = NnSpec {
                    dropout: Some(a["dropout"]),
                    patience: Some(a["patience"] as usize),
                    dim: Some(a["dim"] as usize),
                    batch_size: Some(a["batch_size"] as usize),
                    learning_rate: Some(a["learning_rate"]),
                    ..base
                };
                if sum { ModelSpec::NnSum(nn) } else { ModelSpec::NnAvg(nn) }
            })?;
            done(spec, Some(log))
        }
        ModelSpec::Rf(base) => tune_rf(model, base, views, train, val, opts)?,
        ModelSpec::Constant(_) => done(model.spec, None),
    })
}

/// Grid over topic counts and C; one topic model per topic count.
fn tune_lda(
    base: LdaSpec,
    views: &FeatureViews,
    train: &[usize],
    val: &[usize],
    seed: u64,
) -> Result<(ModelSpec, SearchLog)> {
    let x = views.unigrams.select_rows(train).matrix;
    let xv = views.unigrams.select_rows(val).matrix;
    let (y, yv) = (views.labels_of(train), views.labels_of(val));
    let mut cache: BTreeMap<usize, (LdaModel, DenseMatrix, CsrMatrix)> = BTreeMap::new();
    let space = spaces::lda();
    let result = grid_search(&space, |a| {
        let k = a["n_topics"] as usize;
        let (lda, t, tv) = match cache.entry(k) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(e) => {
                let lda = LdaModel::fit(&x, LdaSpec { n_topics: k, ..base }.params(), seed)?;
                let t = lda.transform(&x)?;
                let tv = CsrMatrix::from_dense(&lda.transform(&xv)?);
                e.insert((lda, t, tv))
            }
        };
        let m = LdaSvmModel::from_topics(lda.clone(), t, &y, SvmParams::with_c(a["c"]))?;
        val_error(&m.svm.predict(tv, 0.0)?, &yv)
    })?;
    let spec = LdaSpec { n_topics: result.best["n_topics"] as usize, c: result.best["c"], ..base };
    Ok((ModelSpec::Lda(spec), SearchLog { space, result }))
}

/// Grid over rank and C; one decomposition at the largest rank, truncated.
fn tune_lsa(
    views: &FeatureViews,
    train: &[usize],
    val: &[usize],
    seed: u64,
) -> Result<(ModelSpec, SearchLog)> {
    let x = views.bigrams.select_rows(train).matrix;
    let xv = views.bigrams.select_rows(val).matrix;
    let (y, yv) = (views.labels_of(train), views.labels_of(val));
    let space = spaces::lsa();
    let d_max = 200.min(x.n_rows()).min(x.n_cols());
    let full = match LsaModel::fit(&x, d_max, seed) {
        Err(Error::RankDeficient { achievable, .. }) if achievable > 0 => LsaModel::fit(&x, achievable, seed)?,
        other => other?,
    };
    let result = grid_search(&space, |a| {
        let lsa = full.truncated(a["d"] as usize)?;
        let m = LsaSvmModel::from_projection(lsa, &x, &y, SvmParams::with_c(a["c"]))?;
        val_error(&m.predict(&xv, 0.0)?, &yv)
    })?;
    let spec = LsaSpec { d: result.best["d"] as usize, c: result.best["c"] };
    Ok((ModelSpec::Lsa(spec), SearchLog { space, result }))
}

/// Both elimination modes on TF-IDF input; the better validation accuracy
/// wins (ties to the non-recursive mode), then the cutoff is swept on the
/// validation scores of a forest trimmed to the chosen size.
fn tune_rf(
    model: &ModelConfig,
    base: RfSpec,
    views: &FeatureViews,
    train: &[usize],
    val: &[usize],
    opts: &TuningOptions,
) -> Result<TunedModel> {
    let counts = views.bigrams.select_rows(train);
    let tfidf = TfidfTransform::fit(&counts)?;
    let x = tfidf.apply(&counts)?.matrix;
    let xv = tfidf.apply(&views.bigrams.select_rows(val))?.matrix;
    let (y, yv) = (views.labels_of(train), views.labels_of(val));
    let params = RfParams { n_trees: opts.rf_trees, threshold: base.threshold, ..RfParams::default() };

    let mut runs = Vec::new();
    for mode in [EliminationMode::Nonrecursive, EliminationMode::Recursive] {
        let r = feature_eliminate(
            |xs: &CsrMatrix, ys: &[bool]| RandomForestModel::fit(xs, ys, params, opts.seed),
            (&x, &y),
            (&xv, &yv),
            mode,
            opts.elimination,
        )?;
        runs.push((mode, r));
    }
    let best_acc = |r: &EliminationResult| r.log.iter().find(|l| l.0 == r.n_top).map_or(0.0, |l| l.1);
    let chosen = if best_acc(&runs[1].1) > best_acc(&runs[0].1) { 1 } else { 0 };
    let n_top = runs[chosen].1.n_top;

    let trimmed = fit_trimmed_forest(&x, &y, &RfSpec { n_trees: opts.rf_trees, n_top, ..base }, opts.seed)?;
    let threshold = threshold_sweep(&trimmed.score(&xv)?, &yv)?;
    let spec = RfSpec { n_top, threshold: threshold.cutoff, ..base };
    Ok(TunedModel {
        config: ModelConfig { name: model.name.clone(), spec: ModelSpec::Rf(spec) },
        search: None,
        elimination: runs,
        threshold: Some(threshold),
    })
}

/// Model name reduced to characters safe in a file name.
pub fn file_stem(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

/// `tuning_<model>.csv` for each search and `elimination_<model>.csv`
/// for the forest.
pub fn write_tuning_outputs(tuned: &[TunedModel], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(Error::file(dir))?;
    let mut paths = Vec::new();
    for t in tuned {
        let stem = file_stem(&t.config.name);
        if let Some(s) = &t.search {
            let p = dir.join(format!("tuning_{stem}.csv"));
            let f = fs::File::create(&p).map_err(Error::file(&p))?;
            write_tuning_log(std::io::BufWriter::new(f), &s.space, &s.result)?;
            paths.push(p);
        }
        if !t.elimination.is_empty() {
            let p = dir.join(format!("elimination_{stem}.csv"));
            let mut w = csv::Writer::from_path(&p)?;
            w.write_record(["mode", "n_top", "accuracy"])?;
            for (mode, r) in &t.elimination {
                let mode = match mode {
                    EliminationMode::Recursive => "recursive",
                    EliminationMode::Nonrecursive => "nonrecursive",
                };
                for (k, acc) in &r.log {
                    w.write_record([mode.to_string(), k.to_string(), acc.to_string()])?;
                }
            }
            w.flush().map_err(Error::file(&p))?;
            paths.push(p);
        }
    }
    Ok(paths)
}
