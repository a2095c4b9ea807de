//! Seeded train/validation/test partitions.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for Fractions {
    fn default() -> Self {
        Self { train: 0.57, val: 0.13, test: 0.30 }
    }
}

impl Fractions {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|f| !(0.0..=1.0).contains(f)) || ((parts.iter().sum::<f64>() - 1.0).abs() > 1e-9) {
            return Err(Error::Config("split fractions must lie in [0, 1] and sum to 1".into()));
        }
        Ok(())
    }

    /// `(train, val, test)` sizes; the rounding remainder goes to test.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let train = ((self.train * n as f64).round() as usize).min(n);
        let val = ((self.val * n as f64).round() as usize).min(n - train);
        (train, val, n - train - val)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitPlan {
    pub seeds: Vec<u64>,
    pub fractions: Fractions,
    /// Split each class separately so every part keeps the overall
    /// prevalence.
    pub stratify: bool,
}

impl Default for SplitPlan {
    fn default() -> Self {
        Self { seeds: (1..=10).collect(), fractions: Fractions::default(), stratify: false }
    }
}

impl SplitPlan {
    pub fn validate(&self) -> Result<()> {
        self.fractions.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one split seed is needed".into()));
        }
        let mut s = self.seeds.clone();
        s.sort_unstable();
        if s.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("split seeds must be distinct".into()));
        }
        Ok(())
    }
}

/// Row indices of each part, each sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Uniformly random partition of `0..labels.len()`. With `stratify`, the
/// positives and negatives are partitioned separately.
pub fn split(labels: &[bool], seed: u64, fractions: Fractions, stratify: bool) -> Result<Split> {
    fractions.validate()?;
    let n = labels.len();
    if n < 3 {
        return Err(Error::InvalidInput(format!("cannot split {n} documents into three parts")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups: Vec<Vec<usize>> = if stratify {
        vec![(0..n).filter(|&i| labels[i]).collect(), (0..n).filter(|&i| !labels[i]).collect()]
    } else {
        vec![(0..n).collect()]
    };
    let mut out = Split { train: Vec::new(), val: Vec::new(), test: Vec::new() };
    for mut g in groups {
        g.shuffle(&mut rng);
        let (a, b, _) = fractions.sizes(g.len());
        out.train.extend_from_slice(&g[..a]);
        out.val.extend_from_slice(&g[a..a + b]);
        out.test.extend_from_slice(&g[a + b..]);
    }
    out.train.sort_unstable();
    out.val.sort_unstable();
    out.test.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hundred_documents() {
        let labels = vec![false; 100];
        let s = split(&labels, 3, Fractions::default(), false).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (57, 13, 30));
        assert_eq!(s, split(&labels, 3, Fractions::default(), false).unwrap());
        assert_ne!(s, split(&labels, 4, Fractions::default(), false).unwrap());
    }

    #[test]
    fn stratified_parts_keep_prevalence() {
        let labels: Vec<bool> = (0..200).map(|i| i % 4 == 0).collect();
        let s = split(&labels, 1, Fractions::default(), true).unwrap();
        let pos = |idx: &[usize]| idx.iter().filter(|&&i| labels[i]).count();
        for part in [&s.train, &s.val, &s.test] {
            let share = pos(part) as f64 / part.len() as f64;
            assert!((share - 0.25).abs() < 0.03, "{share}");
        }
    }

    #[test]
    fn rejects_tiny_corpora_and_bad_plans() {
        assert!(split(&[true, false], 0, Fractions::default(), false).is_err());
        assert!(Fractions { train: 0.5, val: 0.5, test: 0.5 }.validate().is_err());
        assert!(SplitPlan { seeds: vec![1, 1], ..SplitPlan::default() }.validate().is_err());
    }
}
