//! Embedding-bag classifiers: each present unigram looks up a learned
//! vector, the vectors are summed or averaged, and a single sigmoid unit
//! gives the positive-class probability.

mod adam;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use adam::{adam_step, AdamState, BETA1, BETA2, EPSILON};

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::models::{check_features, Scorer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    Sum,
    Avg,
}

impl fmt::Display for Pooling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pooling::Sum => "sum",
            Pooling::Avg => "avg",
        })
    }
}

impl FromStr for Pooling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(Pooling::Sum),
            "avg" => Ok(Pooling::Avg),
            _ => Err(Error::InvalidInput(format!("unknown pooling {s:?}"))),
        }
    }
}

/// Network hyperparameters and training schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainPlan {
    pub pooling: Pooling,
    pub dropout: f64,
    pub patience: usize,
    pub dim: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
}

impl TrainPlan {
    pub fn nn_avg() -> Self {
        Self {
            pooling: Pooling::Avg,
            dropout: 0.75,
            patience: 10,
            dim: 64,
            batch_size: 32,
            learning_rate: 0.001,
            max_epochs: 100,
        }
    }

    pub fn nn_sum() -> Self {
        Self {
            pooling: Pooling::Sum,
            dropout: 0.86,
            patience: 5,
            dim: 64,
            batch_size: 256,
            learning_rate: 0.00001,
            max_epochs: 100,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::invalid("dropout must lie in [0, 1)"));
        }
        if self.patience == 0 || self.dim == 0 || self.batch_size == 0 || self.max_epochs == 0 {
            return Err(Error::invalid("patience, dim, batch size and max epochs must be positive"));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning rate must be finite and nonnegative"));
        }
        Ok(())
    }
}

/// Parameters live in one flat vector, `[E | u | bias]`, with `E` stored
/// row-major as `n_features × dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingNet {
    pub pooling: Pooling,
    pub n_features: usize,
    pub dim: usize,
    pub dropout: f64,
    pub params: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub net: EmbeddingNet,
    pub history: Vec<EpochLoss>,
    /// Epoch whose parameters were kept.
    pub best_epoch: usize,
}

/// A document as its distinct present unigram indices.
pub type Doc = Vec<usize>;

/// Present feature indices of each row; values are ignored beyond being
/// nonzero.
pub fn docs_from_matrix(x: &CsrMatrix) -> Vec<Doc> {
    (0..x.n_rows()).map(|r| x.row(r).0.to_vec()).collect()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Binary cross-entropy of logit `z` against `y`.
fn bce(z: f64, y: bool) -> f64 {
    softplus(z) - if y { z } else { 0.0 }
}

impl EmbeddingNet {
    /// Embeddings uniform in `±1/√dim`, zero output weights, bias at the
    /// log-odds of `prevalence`.
    pub fn init(n_features: usize, plan: &TrainPlan, prevalence: f64, seed: u64) -> Result<Self> {
        plan.validate()?;
        if !(prevalence > 0.0 && prevalence < 1.0) {
            return Err(Error::invalid("prevalence must lie in (0, 1)"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = 1.0 / (plan.dim as f64).sqrt();
        let mut params: Vec<f64> = (0..n_features * plan.dim).map(|_| rng.random_range(-bound..bound)).collect();
        params.extend(std::iter::repeat_n(0.0, plan.dim));
        params.push((prevalence / (1.0 - prevalence)).ln());
        Ok(Self { pooling: plan.pooling, n_features, dim: plan.dim, dropout: plan.dropout, params })
    }

    pub fn embedding(&self, w: usize) -> &[f64] {
        &self.params[w * self.dim..(w + 1) * self.dim]
    }

    pub fn output_weights(&self) -> &[f64] {
        let off = self.n_features * self.dim;
        &self.params[off..off + self.dim]
    }

    pub fn bias(&self) -> f64 {
        *self.params.last().expect("bias is always present")
    }

    fn check_doc(&self, doc: &[usize]) -> Result<()> {
        match doc.iter().find(|&&w| w >= self.n_features) {
            Some(&w) => Err(Error::InvalidInput(format!("feature index {w} out of range 0..{}", self.n_features))),
            None => Ok(()),
        }
    }

    fn pool(&self, doc: &[usize], h: &mut [f64]) {
        h.iter_mut().for_each(|v| *v = 0.0);
        for &w in doc {
            for (a, e) in h.iter_mut().zip(self.embedding(w)) {
                *a += e;
            }
        }
        if self.pooling == Pooling::Avg && !doc.is_empty() {
            let k = doc.len() as f64;
            h.iter_mut().for_each(|v| *v /= k);
        }
    }

    fn logit(&self, h: &[f64]) -> f64 {
        h.iter().zip(self.output_weights()).map(|(a, b)| a * b).sum::<f64>() + self.bias()
    }

    /// Positive-class probability with dropout off.
    pub fn forward(&self, doc: &[usize]) -> Result<f64> {
        self.check_doc(doc)?;
        let mut h = vec![0.0; self.dim];
        self.pool(doc, &mut h);
        Ok(sigmoid(self.logit(&h)))
    }

    /// Mean cross-entropy over `docs` with dropout off.
    pub fn loss(&self, docs: &[Doc], y: &[bool]) -> Result<f64> {
        if docs.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: docs.len(), found: y.len() });
        }
        let mut h = vec![0.0; self.dim];
        let mut total = 0.0;
        for (doc, &label) in docs.iter().zip(y) {
            self.check_doc(doc)?;
            self.pool(doc, &mut h);
            total += bce(self.logit(&h), label);
        }
        Ok(total / docs.len().max(1) as f64)
    }

    /// Mean cross-entropy of a batch and its gradient with respect to
    /// `params`, dropout off.
    pub fn loss_and_gradient(&self, docs: &[Doc], y: &[bool]) -> Result<(f64, Vec<f64>)> {
        if docs.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: docs.len(), found: y.len() });
        }
        for doc in docs {
            self.check_doc(doc)?;
        }
        let refs: Vec<(&[usize], bool)> = docs.iter().map(|d| d.as_slice()).zip(y.iter().copied()).collect();
        let mut grad = vec![0.0; self.params.len()];
        let loss = self.accumulate(&refs, &mut grad, None);
        Ok((loss, grad))
    }

    /// Adds the batch-mean gradient into `grad` and returns the batch-mean
    /// loss. With `dropout`, an inverted-dropout mask is drawn per document
    /// over the pooled vector.
    fn accumulate(&self, batch: &[(&[usize], bool)], grad: &mut [f64], mut dropout: Option<&mut ChaCha8Rng>) -> f64 {
        let d = self.dim;
        let off = self.n_features * d;
        let n = batch.len() as f64;
        let keep = 1.0 - self.dropout;
        let mut h = vec![0.0; d];
        let mut mask = vec![1.0; d];
        let mut dh = vec![0.0; d];
        let mut loss = 0.0;
        for &(doc, label) in batch {
            self.pool(doc, &mut h);
            if let Some(rng) = dropout.as_deref_mut() {
                for (m, x) in mask.iter_mut().zip(h.iter_mut()) {
                    *m = if rng.random::<f64>() < keep { 1.0 / keep } else { 0.0 };
                    *x *= *m;
                }
            }
            let z = self.logit(&h);
            loss += bce(z, label);
            let dz = (sigmoid(z) - if label { 1.0 } else { 0.0 }) / n;
            let u = self.output_weights();
            for j in 0..d {
                grad[off + j] += dz * h[j];
                dh[j] = dz * u[j] * mask[j];
            }
            grad[off + d] += dz;
            if doc.is_empty() {
                continue;
            }
            let scale = match self.pooling {
                Pooling::Sum => 1.0,
                Pooling::Avg => 1.0 / doc.len() as f64,
            };
            for &w in doc {
                for (g, &v) in grad[w * d..(w + 1) * d].iter_mut().zip(&dh) {
                    *g += scale * v;
                }
            }
        }
        loss / n
    }

    /// Minibatch Adam with early stopping on validation loss. Returns the
    /// parameters from the epoch with the lowest validation loss.
    pub fn train(
        mut self,
        plan: &TrainPlan,
        train: (&[Doc], &[bool]),
        val: (&[Doc], &[bool]),
        seed: u64,
    ) -> Result<TrainOutcome> {
        plan.validate()?;
        let (xs, ys) = train;
        let (xv, yv) = val;
        if xs.len() != ys.len() {
            return Err(Error::DimensionMismatch { expected: xs.len(), found: ys.len() });
        }
        if xv.len() != yv.len() {
            return Err(Error::DimensionMismatch { expected: xv.len(), found: yv.len() });
        }
        if xs.is_empty() || xv.is_empty() {
            return Err(Error::invalid("training and validation sets must be nonempty"));
        }
        let pos = ys.iter().filter(|&&v| v).count();
        if pos == 0 || pos == ys.len() {
            return Err(Error::SingleClass);
        }
        for doc in xs.iter().chain(xv) {
            self.check_doc(doc)?;
        }
        self.dropout = plan.dropout;

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = AdamState::new(self.params.len());
        let mut grad = vec![0.0; self.params.len()];
        let mut order: Vec<usize> = (0..xs.len()).collect();
        let mut history = Vec::new();
        let mut best = (f64::INFINITY, self.params.clone(), 0usize);
        let mut stale = 0;
        for epoch in 1..=plan.max_epochs {
            order.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            let mut n_batches = 0;
            for (step, chunk) in order.chunks(plan.batch_size).enumerate() {
                let batch: Vec<(&[usize], bool)> = chunk.iter().map(|&i| (xs[i].as_slice(), ys[i])).collect();
                grad.iter_mut().for_each(|g| *g = 0.0);
                let loss = self.accumulate(&batch, &mut grad, (plan.dropout > 0.0).then_some(&mut rng));
                if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                    return Err(Error::NonFiniteLoss { epoch, step });
                }
                adam_step(&mut self.params, &grad, &mut state, plan.learning_rate);
                epoch_loss += loss;
                n_batches += 1;
            }
            let val_loss = self.loss(xv, yv)?;
            if !val_loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, step: n_batches });
            }
            history.push(EpochLoss { epoch, train_loss: epoch_loss / n_batches as f64, val_loss });
            if val_loss < best.0 {
                best = (val_loss, self.params.clone(), epoch);
                stale = 0;
            } else {
                stale += 1;
                if stale >= plan.patience {
                    break;
                }
            }
        }
        self.params = best.1;
        Ok(TrainOutcome { net: self, history, best_epoch: best.2 })
    }

    /// Initializes from training prevalence and trains.
    pub fn fit(
        n_features: usize,
        plan: &TrainPlan,
        train: (&[Doc], &[bool]),
        val: (&[Doc], &[bool]),
        seed: u64,
    ) -> Result<TrainOutcome> {
        let pos = train.1.iter().filter(|&&v| v).count();
        if pos == 0 || pos == train.1.len() {
            return Err(Error::SingleClass);
        }
        let prevalence = pos as f64 / train.1.len() as f64;
        let net = Self::init(n_features, plan, prevalence, seed)?;
        net.train(plan, train, val, seed.wrapping_add(1))
    }
}

impl Scorer for EmbeddingNet {
    fn score(&self, x: &CsrMatrix) -> Result<Vec<f64>> {
        check_features(self.n_features, x)?;
        docs_from_matrix(x).iter().map(|d| self.forward(d)).collect()
    }

    fn default_threshold(&self) -> f64 {
        0.5
    }
}

/// Writes `epoch,train_loss,val_loss` rows.
pub fn write_loss_history<W: Write>(out: W, history: &[EpochLoss]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in history {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
