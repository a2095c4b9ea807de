//! Latent Dirichlet allocation fitted by collapsed Gibbs sampling, used as
//! a dense feature extractor ahead of a linear SVM.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, DenseMatrix};
use crate::models::svm::{LinearSvmModel, SvmParams};
use crate::models::{check_features, Scorer};
use crate::seed::derive_seed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdaParams {
    pub n_topics: usize,
    /// Document-topic prior; `None` means `1 / n_topics`.
    pub alpha: Option<f64>,
    /// Topic-word prior; `None` means `1 / n_topics`.
    pub eta: Option<f64>,
    pub n_iters: usize,
    /// Fold-in sweeps per document at transform time.
    pub n_infer_iters: usize,
}

impl Default for LdaParams {
    fn default() -> Self {
        Self { n_topics: 30, alpha: None, eta: None, n_iters: 100, n_infer_iters: 50 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub n_topics: usize,
    pub n_features: usize,
    pub alpha: f64,
    pub eta: f64,
    pub n_iters: usize,
    pub n_infer_iters: usize,
    pub seed: u64,
    /// Topic-word assignment counts, `n_topics × n_features` row-major.
    pub topic_word: Vec<u32>,
    pub topic_totals: Vec<u64>,
}

/// Expands a count row into a token list. Non-integer values are rounded.
fn tokens_of(x: &CsrMatrix, r: usize) -> Vec<u32> {
    let (cols, vals) = x.row(r);
    let mut out = Vec::new();
    for (&c, &v) in cols.iter().zip(vals) {
        let n = v.round().max(0.0) as usize;
        out.extend(std::iter::repeat_n(c as u32, n));
    }
    out
}

fn draw(rng: &mut ChaCha8Rng, cumulative: &[f64]) -> usize {
    let total = *cumulative.last().expect("at least one topic");
    let u = rng.random::<f64>() * total;
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1)
}

impl LdaModel {
    pub fn fit(x: &CsrMatrix, params: LdaParams, seed: u64) -> Result<Self> {
        let k = params.n_topics;
        if k == 0 {
            return Err(Error::invalid("n_topics must be at least 1"));
        }
        let alpha = params.alpha.unwrap_or(1.0 / k as f64);
        let eta = params.eta.unwrap_or(1.0 / k as f64);
        if !(alpha > 0.0 && eta > 0.0) {
            return Err(Error::invalid("Dirichlet priors must be positive"));
        }
        if x.values().iter().any(|&v| v < 0.0) {
            return Err(Error::invalid("LDA needs nonnegative counts"));
        }
        let v = x.n_cols();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let docs: Vec<Vec<u32>> = (0..x.n_rows()).map(|r| tokens_of(x, r)).collect();

        let mut topic_word = vec![0u32; k * v];
        let mut totals = vec![0u64; k];
        let mut doc_topic = vec![0u32; docs.len() * k];
        let mut z: Vec<Vec<u16>> = Vec::with_capacity(docs.len());
        for (d, doc) in docs.iter().enumerate() {
            let zs: Vec<u16> = doc
                .iter()
                .map(|&w| {
                    let t = rng.random_range(0..k);
                    topic_word[t * v + w as usize] += 1;
                    totals[t] += 1;
                    doc_topic[d * k + t] += 1;
                    t as u16
                })
                .collect();
            z.push(zs);
        }

        let v_eta = v as f64 * eta;
        let mut cumulative = vec![0.0; k];
        for _ in 0..params.n_iters {
            for (d, doc) in docs.iter().enumerate() {
                let dt = &mut doc_topic[d * k..(d + 1) * k];
                for (i, &w) in doc.iter().enumerate() {
                    let w = w as usize;
                    let old = z[d][i] as usize;
                    topic_word[old * v + w] -= 1;
                    totals[old] -= 1;
                    dt[old] -= 1;
                    let mut acc = 0.0;
                    for t in 0..k {
                        acc += (dt[t] as f64 + alpha) * (topic_word[t * v + w] as f64 + eta)
                            / (totals[t] as f64 + v_eta);
                        cumulative[t] = acc;
                    }
                    let new = draw(&mut rng, &cumulative);
                    topic_word[new * v + w] += 1;
                    totals[new] += 1;
                    dt[new] += 1;
                    z[d][i] = new as u16;
                }
            }
        }
        Ok(Self {
            n_topics: k,
            n_features: v,
            alpha,
            eta,
            n_iters: params.n_iters,
            n_infer_iters: params.n_infer_iters,
            seed,
            topic_word,
            topic_totals: totals,
        })
    }

    /// `φ[t][w]`, the smoothed topic-word distribution.
    pub fn topic_word_distribution(&self) -> DenseMatrix {
        let (k, v) = (self.n_topics, self.n_features);
        let mut phi = DenseMatrix::zeros(k, v);
        for t in 0..k {
            let denom = self.topic_totals[t] as f64 + v as f64 * self.eta;
            for (w, p) in phi.row_mut(t).iter_mut().enumerate() {
                *p = (self.topic_word[t * v + w] as f64 + self.eta) / denom;
            }
        }
        phi
    }

    /// Per-document topic proportions by fold-in sampling against the
    /// frozen topic-word counts, averaged over the second half of the
    /// sweeps.
    pub fn transform(&self, x: &CsrMatrix) -> Result<DenseMatrix> {
        check_features(self.n_features, x)?;
        if x.values().iter().any(|&v| v < 0.0) {
            return Err(Error::invalid("LDA needs nonnegative counts"));
        }
        let k = self.n_topics;
        let phi = self.topic_word_distribution();
        let rows: Vec<Vec<f64>> = (0..x.n_rows())
            .into_par_iter()
            .map(|r| self.infer(&tokens_of(x, r), &phi, derive_seed(self.seed, r as u64)))
            .collect();
        let mut out = DenseMatrix::zeros(x.n_rows(), k);
        for (r, theta) in rows.into_iter().enumerate() {
            out.row_mut(r).copy_from_slice(&theta);
        }
        Ok(out)
    }

    fn infer(&self, doc: &[u32], phi: &DenseMatrix, seed: u64) -> Vec<f64> {
        let k = self.n_topics;
        if doc.is_empty() {
            return vec![1.0 / k as f64; k];
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut z: Vec<usize> = doc.iter().map(|_| rng.random_range(0..k)).collect();
        let mut counts = vec![0u32; k];
        z.iter().for_each(|&t| counts[t] += 1);

        let sweeps = self.n_infer_iters.max(1);
        let burn_in = sweeps / 2;
        let mut theta = vec![0.0; k];
        let mut cumulative = vec![0.0; k];
        for sweep in 0..sweeps {
            for (i, &w) in doc.iter().enumerate() {
                counts[z[i]] -= 1;
                let mut acc = 0.0;
                for t in 0..k {
                    acc += (counts[t] as f64 + self.alpha) * phi[(t, w as usize)];
                    cumulative[t] = acc;
                }
                z[i] = draw(&mut rng, &cumulative);
                counts[z[i]] += 1;
            }
            if sweep >= burn_in {
                for (acc, &c) in theta.iter_mut().zip(&counts) {
                    *acc += c as f64 + self.alpha;
                }
            }
        }
        let total: f64 = theta.iter().sum();
        theta.iter_mut().for_each(|t| *t /= total);
        theta
    }
}

/// LDA topic proportions fed to a linear SVM.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdaSvmModel {
    pub lda: LdaModel,
    pub svm: LinearSvmModel,
}

impl LdaSvmModel {
    pub fn fit(x: &CsrMatrix, y: &[bool], lda: LdaParams, svm: SvmParams, seed: u64) -> Result<Self> {
        crate::models::check_training_labels(x, y)?;
        let lda = LdaModel::fit(x, lda, seed)?;
        let features = CsrMatrix::from_dense(&lda.transform(x)?);
        let svm = LinearSvmModel::fit(&features, y, svm)?;
        Ok(Self { lda, svm })
    }

    /// Fits the SVM on top of an already fitted topic model.
    pub fn from_topics(lda: LdaModel, train_topics: &DenseMatrix, y: &[bool], svm: SvmParams) -> Result<Self> {
        let svm = LinearSvmModel::fit(&CsrMatrix::from_dense(train_topics), y, svm)?;
        Ok(Self { lda, svm })
    }
}

impl Scorer for LdaSvmModel {
    fn score(&self, x: &CsrMatrix) -> Result<Vec<f64>> {
        self.svm.score(&CsrMatrix::from_dense(&self.lda.transform(x)?))
    }

    fn default_threshold(&self) -> f64 {
        0.0
    }
}
