//! One type for every fitted classifier, so models can be stored and
//! scored uniformly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::models::{
    check_features, LdaSvmModel, LinearSvmModel, LsaSvmModel, MnbModel, NbsvmModel, RandomForestModel, Scorer,
    TreeNode,
};
use crate::neural::EmbeddingNet;
use crate::textprep::Weighting;

/// A forest trained on a subset of the input columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrimmedForest {
    pub n_input: usize,
    /// Input columns fed to the forest, in forest feature order.
    pub columns: Vec<usize>,
    pub forest: RandomForestModel,
}

impl Scorer for TrimmedForest {
    fn score(&self, x: &CsrMatrix) -> Result<Vec<f64>> {
        check_features(self.n_input, x)?;
        self.forest.score(&x.select_cols(&self.columns))
    }

    fn default_threshold(&self) -> f64 {
        self.forest.default_threshold()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedModel {
    Mnb(MnbModel),
    Svm(LinearSvmModel),
    Nbsvm(NbsvmModel),
    Forest(TrimmedForest),
    LdaSvm(LdaSvmModel),
    LsaSvm(LsaSvmModel),
    Neural(EmbeddingNet),
}

impl FittedModel {
    pub fn kind(&self) -> &'static str {
        match self {
            FittedModel::Mnb(_) => "mnb",
            FittedModel::Svm(_) => "svm",
            FittedModel::Nbsvm(_) => "nbsvm",
            FittedModel::Forest(_) => "rf",
            FittedModel::LdaSvm(_) => "lda",
            FittedModel::LsaSvm(_) => "lsa",
            FittedModel::Neural(_) => "nn",
        }
    }

    /// Weighting of the document-term matrix the model was trained on.
    pub fn input_weighting(&self) -> Weighting {
        match self {
            FittedModel::Mnb(_) | FittedModel::Svm(_) | FittedModel::LdaSvm(_) | FittedModel::LsaSvm(_) => {
                Weighting::Count
            }
            FittedModel::Nbsvm(_) | FittedModel::Neural(_) => Weighting::Binary,
            FittedModel::Forest(_) => Weighting::Tfidf,
        }
    }

    /// Number of input columns the model scores.
    pub fn n_features(&self) -> usize {
        match self {
            FittedModel::Mnb(m) => m.feature_log_prob[0].len(),
            FittedModel::Svm(m) => m.w.len(),
            FittedModel::Nbsvm(m) => m.r.len(),
            FittedModel::Forest(m) => m.n_input,
            FittedModel::LdaSvm(m) => m.lda.n_features,
            FittedModel::LsaSvm(m) => m.lsa.vt.cols(),
            FittedModel::Neural(m) => m.n_features,
        }
    }

    /// Structural consistency of a decoded model, so that scoring cannot
    /// index out of bounds or loop.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ModelFormat(msg));
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            FittedModel::Mnb(m) => {
                let [neg, pos] = &m.feature_log_prob;
                if neg.len() != pos.len() || !finite(neg) || !finite(pos) || !finite(&m.class_log_prior) {
                    return bad("naive Bayes tables are ragged or not finite".into());
                }
            }
            FittedModel::Svm(m) => {
                if !finite(&m.w) || !m.b.is_finite() {
                    return bad("SVM weights are not finite".into());
                }
            }
            FittedModel::Nbsvm(m) => {
                if m.w.len() != m.r.len() || m.svm_w.len() != m.r.len() || !finite(&m.w) || !finite(&m.r) || !m.b.is_finite() {
                    return bad("NB-SVM vectors disagree in length or are not finite".into());
                }
            }
            FittedModel::Forest(t) => {
                let f = &t.forest;
                if t.columns.len() != f.n_features || t.columns.iter().any(|&c| c >= t.n_input) {
                    return bad("forest columns do not match its inputs".into());
                }
                if f.trees.is_empty() {
                    return bad("forest has no trees".into());
                }
                for (k, tree) in f.trees.iter().enumerate() {
                    if tree.nodes.is_empty() {
                        return bad(format!("tree {k} is empty"));
                    }
                    for (i, node) in tree.nodes.iter().enumerate() {
                        if let TreeNode::Split { feature, threshold, left, right } = *node {
                            let child_ok = |c: usize| c > i && c < tree.nodes.len();
                            if feature >= f.n_features || !threshold.is_finite() || !child_ok(left) || !child_ok(right) {
                                return bad(format!("tree {k} node {i} is malformed"));
                            }
                        }
                    }
                }
            }
            FittedModel::LdaSvm(m) => {
                let l = &m.lda;
                let cells = l.n_topics.checked_mul(l.n_features);
                if l.n_topics == 0 || cells != Some(l.topic_word.len()) || l.topic_totals.len() != l.n_topics {
                    return bad("topic model tables have the wrong shape".into());
                }
                if !(l.alpha > 0.0 && l.alpha.is_finite() && l.eta > 0.0 && l.eta.is_finite()) {
                    return bad("topic model priors must be positive".into());
                }
                if m.svm.w.len() != l.n_topics || !finite(&m.svm.w) || !m.svm.b.is_finite() {
                    return bad("topic SVM does not match the topic count".into());
                }
            }
            FittedModel::LsaSvm(m) => {
                if m.lsa.s.len() != m.lsa.vt.rows() || m.svm.w.len() != m.lsa.s.len() {
                    return bad("LSA factors and SVM disagree in rank".into());
                }
                if !finite(m.lsa.vt.as_slice()) || !finite(&m.svm.w) || !m.svm.b.is_finite() {
                    return bad("LSA model is not finite".into());
                }
            }
            FittedModel::Neural(m) => {
                let expected = m.n_features.checked_mul(m.dim).and_then(|n| n.checked_add(m.dim + 1));
                if m.dim == 0 || expected != Some(m.params.len()) || !finite(&m.params) {
                    return bad("network parameters have the wrong length".into());
                }
            }
        }
        Ok(())
    }

    fn scorer(&self) -> &dyn Scorer {
        match self {
            FittedModel::Mnb(m) => m,
            FittedModel::Svm(m) => m,
            FittedModel::Nbsvm(m) => m,
            FittedModel::Forest(m) => m,
            FittedModel::LdaSvm(m) => m,
            FittedModel::LsaSvm(m) => m,
            FittedModel::Neural(m) => m,
        }
    }
}

impl Scorer for FittedModel {
    fn score(&self, x: &CsrMatrix) -> Result<Vec<f64>> {
        self.scorer().score(x)
    }

    fn default_threshold(&self) -> f64 {
        self.scorer().default_threshold()
    }
}
