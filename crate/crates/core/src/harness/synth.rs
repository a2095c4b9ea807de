//! Synthetic labelled corpora with a known naive-Bayes-optimal accuracy.
//!
//! Words are pseudo-words (`q` plus three consonant-vowel syllables) so
//! preprocessing leaves them untouched. Each class draws tokens i.i.d. from
//! a mixture of a Zipf background and `n_topics` sparse topics; the topic
//! weights of the two classes are `softmax(±separation · a)` for fixed
//! Gaussian loadings `a`, so separation 0 makes the classes identical.
//! Document lengths are log-normal, fitted by least squares to length
//! quartiles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::seed::derive_seed;
use crate::textprep::Document;

/// Word-count quartiles the default length model is fitted to.
pub const LENGTH_QUARTILES: [f64; 3] = [813.0, 1528.0, 2737.0];
pub const LENGTH_MIN: usize = 2;
pub const LENGTH_MAX: usize = 20801;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LengthModel {
    pub mu: f64,
    pub sigma: f64,
    /// Multiplies every sampled length; below 1 gives shorter documents.
    pub scale: f64,
}

impl LengthModel {
    /// Least-squares log-normal fit through the three quartiles.
    pub fn from_quartiles(q: [f64; 3]) -> Result<Self> {
        if !(q[0] > 0.0 && q[0] < q[1] && q[1] < q[2]) {
            return Err(Error::Config("quartiles must be positive and increasing".into()));
        }
        let z = Normal::standard().inverse_cdf(0.75);
        let logs = q.map(f64::ln);
        let mu = logs.iter().sum::<f64>() / 3.0;
        let sigma = (logs[2] - logs[0]) * z / (2.0 * z * z);
        Ok(Self { mu, sigma, scale: 1.0 })
    }

    /// Length at standard-normal quantile `z`.
    fn at(&self, z: f64) -> usize {
        let raw = ((self.mu + self.sigma * z).exp() * self.scale).round();
        (raw.max(0.0) as usize).clamp(LENGTH_MIN, LENGTH_MAX)
    }
}

impl Default for LengthModel {
    fn default() -> Self {
        Self::from_quartiles(LENGTH_QUARTILES).expect("built-in quartiles are valid")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub n_docs: usize,
    pub prevalence: f64,
    pub vocab_size: usize,
    pub n_topics: usize,
    /// Dirichlet concentration of each topic's word distribution.
    pub topic_concentration: f64,
    /// Share of the Zipf background in both class distributions.
    pub background: f64,
    pub zipf_exponent: f64,
    pub separation: f64,
    pub length: LengthModel,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_docs: 2000,
            prevalence: 0.489,
            vocab_size: 2000,
            n_topics: 20,
            topic_concentration: 0.1,
            background: 0.5,
            zipf_exponent: 1.0,
            separation: 1.0,
            length: LengthModel::default(),
            seed: 2019,
        }
    }
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if !(self.prevalence > 0.0 && self.prevalence < 1.0) {
            return Err(Error::Config("prevalence must lie in (0, 1)".into()));
        }
        if self.vocab_size < 2 || self.vocab_size > 39usize.pow(3) || self.n_topics == 0 {
            return Err(Error::Config("vocab_size must be in 2..=59319 and n_topics positive".into()));
        }
        if !(self.topic_concentration > 0.0 && (0.0..=1.0).contains(&self.background) && self.zipf_exponent >= 0.0) {
            return Err(Error::Config("bad topic concentration, background share or Zipf exponent".into()));
        }
        if !(self.separation >= 0.0 && self.separation.is_finite()) {
            return Err(Error::Config("separation must be finite and nonnegative".into()));
        }
        if !(self.length.sigma >= 0.0 && self.length.scale > 0.0 && self.length.mu.is_finite()) {
            return Err(Error::Config("bad length model".into()));
        }
        Ok(())
    }
}

/// Pseudo-word for vocabulary index `i`.
pub fn synth_word(i: usize) -> String {
    const CONSONANTS: &[u8] = b"bdfgklmnprtvz";
    const VOWELS: &[u8] = b"aou";
    let mut w = String::from("q");
    let mut rest = i;
    for _ in 0..3 {
        let s = rest % 39;
        rest /= 39;
        w.push(CONSONANTS[s / 3] as char);
        w.push(VOWELS[s % 3] as char);
    }
    w
}

/// The two class-conditional word distributions of a spec.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthModel {
    pub spec: SynthSpec,
    pub positive: Vec<f64>,
    pub negative: Vec<f64>,
}

fn normalize(v: &mut [f64]) -> Result<()> {
    let s: f64 = v.iter().sum();
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::invalid("degenerate distribution"));
    }
    v.iter_mut().for_each(|x| *x /= s);
    Ok(())
}

fn softmax(v: &[f64]) -> Vec<f64> {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut e: Vec<f64> = v.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter_mut().for_each(|x| *x /= s);
    e
}

impl SynthModel {
    /// Topics and loadings depend only on the seed, not on separation.
    pub fn new(spec: SynthSpec) -> Result<Self> {
        spec.validate()?;
        let (v, k) = (spec.vocab_size, spec.n_topics);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, 0));
        let mut background: Vec<f64> = (0..v).map(|w| ((w + 1) as f64).powf(-spec.zipf_exponent)).collect();
        normalize(&mut background)?;
        let gamma = Gamma::new(spec.topic_concentration, 1.0).map_err(|e| Error::Config(e.to_string()))?;
        let mut topics = Vec::with_capacity(k);
        for _ in 0..k {
            let mut t: Vec<f64> = (0..v).map(|_| gamma.sample(&mut rng)).collect();
            normalize(&mut t)?;
            topics.push(t);
        }
        let loadings: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();

        let class = |sign: f64| -> Result<Vec<f64>> {
            let weights = softmax(&loadings.iter().map(|a| sign * spec.separation * a).collect::<Vec<_>>());
            let mut p: Vec<f64> = background.iter().map(|b| spec.background * b).collect();
            for (t, wt) in topics.iter().zip(&weights) {
                for (pi, ti) in p.iter_mut().zip(t) {
                    *pi += (1.0 - spec.background) * wt * ti;
                }
            }
            normalize(&mut p)?;
            Ok(p)
        };
        Ok(Self { spec, positive: class(1.0)?, negative: class(-1.0)? })
    }

    /// Expected token distribution of the whole corpus.
    pub fn marginal(&self) -> Vec<f64> {
        let pi = self.spec.prevalence;
        self.positive.iter().zip(&self.negative).map(|(p, n)| pi * p + (1.0 - pi) * n).collect()
    }

    /// Accuracy of the Bayes rule that knows both word distributions and
    /// the prevalence. The log-likelihood ratio of a document is a sum of
    /// i.i.d. per-token terms, approximated as normal given the length and
    /// integrated over the length distribution.
    pub fn nb_optimal_accuracy(&self) -> f64 {
        let pi = self.spec.prevalence;
        let prior = (pi / (1.0 - pi)).ln();
        let llr: Vec<f64> = self.positive.iter().zip(&self.negative).map(|(p, n)| (p / n).ln()).collect();
        let moments = |p: &[f64]| {
            let m: f64 = p.iter().zip(&llr).map(|(a, l)| a * l).sum();
            let s2: f64 = p.iter().zip(&llr).map(|(a, l)| a * l * l).sum::<f64>() - m * m;
            (m, s2.max(0.0).sqrt())
        };
        let (m_pos, s_pos) = moments(&self.positive);
        let (m_neg, s_neg) = moments(&self.negative);
        let normal = Normal::standard();
        // P(mean + sd · Z > 0)
        let above = |mean: f64, sd: f64| {
            if sd > 1e-12 {
                normal.cdf(mean / sd)
            } else if mean > 0.0 {
                1.0
            } else if mean < 0.0 {
                0.0
            } else {
                0.5
            }
        };
        let n_grid = 4001;
        let (mut acc, mut mass) = (0.0, 0.0);
        for i in 0..n_grid {
            let z = -8.0 + 16.0 * i as f64 / (n_grid - 1) as f64;
            let w = normal.pdf(z);
            let l = self.spec.length.at(z) as f64;
            let correct_pos = above(l * m_pos + prior, l.sqrt() * s_pos);
            let correct_neg = 1.0 - above(l * m_neg + prior, l.sqrt() * s_neg);
            acc += w * (pi * correct_pos + (1.0 - pi) * correct_neg);
            mass += w;
        }
        acc / mass
    }

    /// Labels and token ids of each document.
    pub fn sample(&self) -> Result<Vec<(bool, Vec<u32>)>> {
        let pos = WeightedAliasIndex::new(self.positive.clone()).map_err(|e| Error::invalid(e.to_string()))?;
        let neg = WeightedAliasIndex::new(self.negative.clone()).map_err(|e| Error::invalid(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.spec.seed, 1));
        Ok((0..self.spec.n_docs)
            .map(|_| {
                let label = rng.random::<f64>() < self.spec.prevalence;
                let len = self.spec.length.at(rng.sample(StandardNormal));
                let dist = if label { &pos } else { &neg };
                (label, (0..len).map(|_| dist.sample(&mut rng) as u32).collect())
            })
            .collect())
    }
}

pub fn synth_corpus(spec: &SynthSpec) -> Result<Vec<Document>> {
    let model = SynthModel::new(*spec)?;
    let words: Vec<String> = (0..spec.vocab_size).map(synth_word).collect();
    Ok(model
        .sample()?
        .into_iter()
        .enumerate()
        .map(|(i, (label, tokens))| {
            let text = tokens.iter().map(|&t| words[t as usize].as_str()).collect::<Vec<_>>().join(" ");
            Document { id: format!("doc{i:05}"), text, label: Some(label) }
        })
        .collect())
}

/// Smallest separation (to bisection precision) whose naive-Bayes-optimal
/// accuracy reaches `target`.
pub fn calibrate_separation(spec: &SynthSpec, target: f64) -> Result<f64> {
    let accuracy = |s: f64| -> Result<f64> { Ok(SynthModel::new(SynthSpec { separation: s, ..*spec })?.nb_optimal_accuracy()) };
    let base = accuracy(0.0)?;
    if !(target > base && target < 1.0) {
        return Err(Error::Config(format!("target accuracy must lie in ({base:.4}, 1)")));
    }
    let mut hi = 1.0;
    while accuracy(hi)? < target {
        hi *= 2.0;
        if hi > 1024.0 {
            return Err(Error::Config("target accuracy is out of reach for this spec".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if accuracy(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}
