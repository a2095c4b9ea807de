//! Model specifications and the feature pipeline each model runs on.
//!
//! Two count matrices are built once per corpus: unigrams, and unigrams
//! plus bigrams. Each model selects its matrix and applies its own
//! weighting, with any statistics (TF-IDF document frequencies) taken from
//! the training rows only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::models::{
    FittedModel, LdaParams, LdaSvmModel, LinearSvmModel, LsaSvmModel, MnbModel, NbsvmModel, NbsvmParams,
    RandomForestModel, RfParams, Scorer, SvmParams, TrimmedForest, DEFAULT_LSA_RANK, DEFAULT_MNB_ALPHA,
    DEFAULT_RF_THRESHOLD,
};
use crate::neural::{docs_from_matrix, EmbeddingNet, Pooling, TrainPlan};
use crate::seed::derive_seed;
use crate::textprep::{
    binarize, tokenize_corpus, DocTermMatrix, Document, NgramOrder, Stopwords, TfidfTransform, Vocabulary,
    Weighting,
};

/// Count matrices over the whole corpus, rows in corpus order.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureViews {
    pub unigram_vocab: Vocabulary,
    pub unigrams: DocTermMatrix,
    pub bigram_vocab: Vocabulary,
    pub bigrams: DocTermMatrix,
    pub labels: Vec<bool>,
}

impl FeatureViews {
    /// Every document must carry a label.
    pub fn build(corpus: &[Document], stopwords: &Stopwords, min_df: usize) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let labels = corpus
            .iter()
            .map(|d| d.label.ok_or_else(|| Error::InvalidInput(format!("document {:?} has no label", d.id))))
            .collect::<Result<Vec<_>>>()?;
        let tokens = tokenize_corpus(corpus, stopwords);
        let unigram_vocab = Vocabulary::from_token_docs(&tokens, NgramOrder::Unigram, min_df)?;
        let bigram_vocab = Vocabulary::from_token_docs(&tokens, NgramOrder::Bigram, min_df)?;
        Ok(Self {
            unigrams: DocTermMatrix::from_token_docs(&tokens, &unigram_vocab),
            bigrams: DocTermMatrix::from_token_docs(&tokens, &bigram_vocab),
            unigram_vocab,
            bigram_vocab,
            labels,
        })
    }

    pub fn n_docs(&self) -> usize {
        self.labels.len()
    }

    pub fn view(&self, v: View) -> &DocTermMatrix {
        match v {
            View::Unigram => &self.unigrams,
            View::Bigram => &self.bigrams,
        }
    }

    pub fn labels_of(&self, rows: &[usize]) -> Vec<bool> {
        rows.iter().map(|&i| self.labels[i]).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum View {
    Unigram,
    Bigram,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LdaSpec {
    pub n_topics: usize,
    pub c: f64,
    pub n_iters: usize,
    pub n_infer_iters: usize,
}

impl Default for LdaSpec {
    fn default() -> Self {
        let p = LdaParams::default();
        Self { n_topics: p.n_topics, c: 8.0, n_iters: p.n_iters, n_infer_iters: p.n_infer_iters }
    }
}

impl LdaSpec {
    pub fn params(&self) -> LdaParams {
        LdaParams { n_topics: self.n_topics, n_iters: self.n_iters, n_infer_iters: self.n_infer_iters, ..LdaParams::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LsaSpec {
    pub d: usize,
    pub c: f64,
}

impl Default for LsaSpec {
    fn default() -> Self {
        Self { d: DEFAULT_LSA_RANK, c: 0.001 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MnbSpec {
    pub alpha: f64,
}

impl Default for MnbSpec {
    fn default() -> Self {
        Self { alpha: DEFAULT_MNB_ALPHA }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmSpec {
    pub c: f64,
}

impl Default for SvmSpec {
    fn default() -> Self {
        Self { c: 0.0001 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NbsvmSpec {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
}

impl Default for NbsvmSpec {
    fn default() -> Self {
        let p = NbsvmParams::default();
        Self { alpha: p.alpha, beta: p.beta, c: p.c }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RfSpec {
    pub n_trees: usize,
    pub threshold: f64,
    /// Features kept after ranking by a first forest; 0 keeps all.
    pub n_top: usize,
}

impl Default for RfSpec {
    fn default() -> Self {
        Self { n_trees: 1000, threshold: DEFAULT_RF_THRESHOLD, n_top: 130 }
    }
}

/// Network settings; unset fields take the defaults of the pooling mode.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NnSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dropout: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patience: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_epochs: Option<usize>,
}

impl NnSpec {
    pub fn plan(&self, pooling: Pooling) -> TrainPlan {
        let d = match pooling {
            Pooling::Sum => TrainPlan::nn_sum(),
            Pooling::Avg => TrainPlan::nn_avg(),
        };
        TrainPlan {
            pooling,
            dropout: self.dropout.unwrap_or(d.dropout),
            patience: self.patience.unwrap_or(d.patience),
            dim: self.dim.unwrap_or(d.dim),
            batch_size: self.batch_size.unwrap_or(d.batch_size),
            learning_rate: self.learning_rate.unwrap_or(d.learning_rate),
            max_epochs: self.max_epochs.unwrap_or(d.max_epochs),
        }
    }

    pub fn from_plan(p: &TrainPlan) -> Self {
        Self {
            dropout: Some(p.dropout),
            patience: Some(p.patience),
            dim: Some(p.dim),
            batch_size: Some(p.batch_size),
            learning_rate: Some(p.learning_rate),
            max_epochs: Some(p.max_epochs),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstantSpec {
    pub positive: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Lda(LdaSpec),
    Lsa(LsaSpec),
    Mnb(MnbSpec),
    Svm(SvmSpec),
    Nbsvm(NbsvmSpec),
    Rf(RfSpec),
    NnSum(NnSpec),
    NnAvg(NnSpec),
    /// Predicts one class for every document; a baseline for checks.
    Constant(ConstantSpec),
}

impl ModelSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpec::Lda(_) => "lda",
            ModelSpec::Lsa(_) => "lsa",
            ModelSpec::Mnb(_) => "mnb",
            ModelSpec::Svm(_) => "svm",
            ModelSpec::Nbsvm(_) => "nbsvm",
            ModelSpec::Rf(_) => "rf",
            ModelSpec::NnSum(_) => "nn_sum",
            ModelSpec::NnAvg(_) => "nn_avg",
            ModelSpec::Constant(_) => "constant",
        }
    }

    /// Weighting the model's input matrix carries.
    pub fn input_weighting(&self) -> Weighting {
        match self {
            ModelSpec::Nbsvm(_) | ModelSpec::NnSum(_) | ModelSpec::NnAvg(_) => Weighting::Binary,
            ModelSpec::Rf(_) => Weighting::Tfidf,
            _ => Weighting::Count,
        }
    }

    /// Which count matrix the model starts from.
    pub fn view(&self) -> View {
        match self {
            ModelSpec::Lda(_) | ModelSpec::NnSum(_) | ModelSpec::NnAvg(_) => View::Unigram,
            _ => View::Bigram,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub name: String,
    #[serde(flatten)]
    pub spec: ModelSpec,
}

/// The eight classifiers with their tuned settings.
pub fn default_models() -> Vec<ModelConfig> {
    let m = |name: &str, spec| ModelConfig { name: name.to_string(), spec };
    vec![
        m("LDA", ModelSpec::Lda(LdaSpec::default())),
        m("MNB", ModelSpec::Mnb(MnbSpec::default())),
        m("SVM", ModelSpec::Svm(SvmSpec::default())),
        m("LSA", ModelSpec::Lsa(LsaSpec::default())),
        m("NN_sum", ModelSpec::NnSum(NnSpec::default())),
        m("NN_avg", ModelSpec::NnAvg(NnSpec::default())),
        m("RF", ModelSpec::Rf(RfSpec::default())),
        m("NB-SVM", ModelSpec::Nbsvm(NbsvmSpec::default())),
    ]
}

/// Reweighting applied to a count matrix before the model sees it.
#[derive(Clone, Debug, PartialEq)]
pub enum Transform {
    Counts,
    Binary,
    Tfidf(TfidfTransform),
}

impl Transform {
    pub fn apply(&self, counts: &DocTermMatrix) -> Result<CsrMatrix> {
        Ok(match self {
            Transform::Counts => counts.matrix.clone(),
            Transform::Binary => binarize(counts).matrix,
            Transform::Tfidf(t) => t.apply(counts)?.matrix,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Predictor {
    Model(FittedModel),
    Constant(bool),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FittedPipeline {
    pub view: View,
    pub transform: Transform,
    pub predictor: Predictor,
}

impl FittedPipeline {
    pub fn input(&self, views: &FeatureViews, rows: &[usize]) -> Result<CsrMatrix> {
        self.transform.apply(&views.view(self.view).select_rows(rows))
    }

    pub fn score(&self, views: &FeatureViews, rows: &[usize]) -> Result<Vec<f64>> {
        match &self.predictor {
            Predictor::Model(m) => m.score(&self.input(views, rows)?),
            Predictor::Constant(p) => Ok(vec![if *p { 1.0 } else { 0.0 }; rows.len()]),
        }
    }

    pub fn threshold(&self) -> f64 {
        match &self.predictor {
            Predictor::Model(m) => m.default_threshold(),
            Predictor::Constant(_) => 0.5,
        }
    }

    pub fn predict(&self, views: &FeatureViews, rows: &[usize]) -> Result<Vec<bool>> {
        let t = self.threshold();
        Ok(self.score(views, rows)?.into_iter().map(|s| s >= t).collect())
    }
}

/// Fits `spec` on the `train` rows; `val` rows are used only for early
/// stopping of the networks.
pub fn fit_pipeline(
    spec: &ModelSpec,
    views: &FeatureViews,
    train: &[usize],
    val: &[usize],
    seed: u64,
) -> Result<FittedPipeline> {
    let view = spec.view();
    if let ModelSpec::Constant(c) = spec {
        return Ok(FittedPipeline { view, transform: Transform::Counts, predictor: Predictor::Constant(c.positive) });
    }
    let counts = views.view(view).select_rows(train);
    let transform = match spec.input_weighting() {
        Weighting::Count => Transform::Counts,
        Weighting::Binary => Transform::Binary,
        Weighting::Tfidf => Transform::Tfidf(TfidfTransform::fit(&counts)?),
    };
    let weighted = |m: &DocTermMatrix| -> Result<DocTermMatrix> {
        DocTermMatrix::new(transform.apply(m)?, spec.input_weighting())
    };
    let x = weighted(&counts)?;
    let y = views.labels_of(train);
    let needs_val = matches!(spec, ModelSpec::NnSum(_) | ModelSpec::NnAvg(_));
    let (xv, yv) = if needs_val {
        (Some(weighted(&views.view(view).select_rows(val))?), views.labels_of(val))
    } else {
        (None, Vec::new())
    };
    let model = fit_model(spec, &x, &y, xv.as_ref().map(|m| (m, yv.as_slice())), seed)?;
    Ok(FittedPipeline { view, transform, predictor: Predictor::Model(model) })
}

/// Fits `spec` on an already weighted matrix, which must carry
/// [`ModelSpec::input_weighting`]. The networks need a validation set.
pub fn fit_model(
    spec: &ModelSpec,
    x: &DocTermMatrix,
    y: &[bool],
    val: Option<(&DocTermMatrix, &[bool])>,
    seed: u64,
) -> Result<FittedModel> {
    let expected = spec.input_weighting();
    for m in std::iter::once(x).chain(val.map(|v| v.0)) {
        if m.weighting != expected {
            return Err(Error::InvalidInput(format!(
                "{} expects a {expected} matrix, got {}",
                spec.kind(),
                m.weighting
            )));
        }
    }
    let xm = &x.matrix;
    Ok(match spec {
        ModelSpec::Lda(s) => FittedModel::LdaSvm(LdaSvmModel::fit(xm, y, s.params(), SvmParams::with_c(s.c), seed)?),
        ModelSpec::Lsa(s) => FittedModel::LsaSvm(LsaSvmModel::fit(xm, y, s.d, SvmParams::with_c(s.c), seed)?),
        ModelSpec::Mnb(s) => FittedModel::Mnb(MnbModel::fit(xm, y, s.alpha)?),
        ModelSpec::Svm(s) => FittedModel::Svm(LinearSvmModel::fit(xm, y, SvmParams::with_c(s.c))?),
        ModelSpec::Nbsvm(s) => {
            FittedModel::Nbsvm(NbsvmModel::fit(xm, y, NbsvmParams { alpha: s.alpha, beta: s.beta, c: s.c })?)
        }
        ModelSpec::Rf(s) => FittedModel::Forest(fit_trimmed_forest(xm, y, s, seed)?),
        ModelSpec::NnSum(s) | ModelSpec::NnAvg(s) => {
            let pooling = if matches!(spec, ModelSpec::NnSum(_)) { Pooling::Sum } else { Pooling::Avg };
            let (xv, yv) = val.ok_or_else(|| Error::invalid("the network needs a validation set for early stopping"))?;
            let (train_docs, val_docs) = (docs_from_matrix(xm), docs_from_matrix(&xv.matrix));
            let out = EmbeddingNet::fit(x.n_features(), &s.plan(pooling), (&train_docs, y), (&val_docs, yv), seed)?;
            FittedModel::Neural(out.net)
        }
        ModelSpec::Constant(_) => return Err(Error::invalid("the constant baseline has no fitted model")),
    })
}

/// Forest on all columns, or, with `n_top`, on the `n_top` columns ranked
/// highest by a first forest.
pub fn fit_trimmed_forest(x: &CsrMatrix, y: &[bool], s: &RfSpec, seed: u64) -> Result<TrimmedForest> {
    let params = RfParams { n_trees: s.n_trees, threshold: s.threshold, ..RfParams::default() };
    let p = x.n_cols();
    let full = RandomForestModel::fit(x, y, params, seed)?;
    if s.n_top == 0 || s.n_top >= p {
        return Ok(TrimmedForest { n_input: p, columns: (0..p).collect(), forest: full });
    }
    let columns: Vec<usize> = full.ranked_features().into_iter().take(s.n_top).collect();
    let forest = RandomForestModel::fit(&x.select_cols(&columns), y, params, derive_seed(seed, 1))?;
    Ok(TrimmedForest { n_input: p, columns, forest })
}
