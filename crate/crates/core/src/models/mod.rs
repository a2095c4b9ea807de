//! The non-neural classifiers: multinomial naive Bayes, linear SVM,
//! NB-SVM, random forest, and the LDA/LSA feature extractors that feed a
//! linear SVM.

mod any;
mod forest;
mod lda;
mod lsa;
mod mnb;
mod nbsvm;
mod svm;

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

pub use any::{FittedModel, TrimmedForest};
pub use forest::{RandomForestModel, RfParams, Tree, TreeNode, DEFAULT_RF_THRESHOLD};
pub use lda::{LdaModel, LdaParams, LdaSvmModel};
pub use lsa::{LsaModel, LsaSvmModel, DEFAULT_LSA_RANK};
pub use mnb::{MnbModel, DEFAULT_MNB_ALPHA};
pub use nbsvm::{log_count_ratio, NbsvmModel, NbsvmParams};
pub use svm::{squared_hinge_objective, LinearSvmModel, SvmParams};

/// Per-document scores and thresholded labels.
pub trait Scorer {
    fn score(&self, x: &CsrMatrix) -> Result<Vec<f64>>;

    /// Cutoff at which a score counts as a positive call.
    fn default_threshold(&self) -> f64;

    /// `score >= threshold` is positive.
    fn predict(&self, x: &CsrMatrix, threshold: f64) -> Result<Vec<bool>> {
        Ok(self.score(x)?.into_iter().map(|s| s >= threshold).collect())
    }
}

/// Checks label count against rows and that both classes occur.
pub(crate) fn check_training_labels(x: &CsrMatrix, y: &[bool]) -> Result<()> {
    if x.n_rows() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.n_rows(), found: y.len() });
    }
    if y.is_empty() {
        return Err(Error::invalid("empty training set"));
    }
    let pos = y.iter().filter(|&&v| v).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::SingleClass);
    }
    Ok(())
}

pub(crate) fn check_features(expected: usize, x: &CsrMatrix) -> Result<()> {
    if x.n_cols() != expected {
        return Err(Error::DimensionMismatch { expected, found: x.n_cols() });
    }
    Ok(())
}
