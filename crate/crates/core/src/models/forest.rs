//! Random forest of CART trees grown on bootstrap samples with Gini
//! impurity.
//!
//! At each node, features are visited in uniformly random order until
//! `max_features` of them have been found that vary within the node; the
//! best Gini split among those is taken. Trees grow until leaves are pure
//! or no feature varies. A document's score is the fraction of trees whose
//! leaf votes positive.
//!
//! Sparse input is handled column-wise. When random draws keep landing on
//! features that are all-zero in a small node, the remaining candidates are
//! drawn directly from the features present in that node, which is the
//! same distribution as continuing to draw.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::models::{check_features, check_training_labels, Scorer};
use crate::seed::derive_seed;

/// Cutoff on the positive-vote fraction chosen for surveillance use.
pub const DEFAULT_RF_THRESHOLD: f64 = 0.47;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RfParams {
    pub n_trees: usize,
    pub threshold: f64,
    /// Features examined per split; `None` means `ceil(sqrt(n_features))`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
}

impl Default for RfParams {
    fn default() -> Self {
        Self { n_trees: 1000, threshold: DEFAULT_RF_THRESHOLD, max_features: None, bootstrap: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf { positive: bool },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    fn vote(&self, dense_row: &[f64]) -> bool {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf { positive } => return positive,
                TreeNode::Split { feature, threshold, left, right } => {
                    i = if dense_row[feature] <= threshold { left } else { right };
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForestModel {
    pub params: RfParams,
    pub n_features: usize,
    pub trees: Vec<Tree>,
    /// Mean impurity decrease per feature, normalized to sum to 1 (all
    /// zeros if no tree ever split).
    pub importances: Vec<f64>,
}

impl RandomForestModel {
    pub fn fit(x: &CsrMatrix, y: &[bool], params: RfParams, seed: u64) -> Result<Self> {
        if x.n_rows() == 0 {
            return Err(Error::invalid("empty training set"));
        }
        if params.n_trees == 0 {
            return Err(Error::invalid("a forest needs at least one tree"));
        }
        if !(params.threshold > 0.0 && params.threshold < 1.0) {
            return Err(Error::invalid("threshold must lie in (0, 1)"));
        }
        check_training_labels(x, y)?;
        let p = x.n_cols();
        let max_features = params
            .max_features
            .unwrap_or_else(|| (p as f64).sqrt().ceil() as usize)
            .clamp(1, p.max(1));
        let grower = Grower { x, cols: x.transpose(), y, max_features, bootstrap: params.bootstrap };
        let grown: Vec<(Tree, Vec<f64>)> = (0..params.n_trees)
            .into_par_iter()
            .map(|t| grower.grow(derive_seed(seed, t as u64)))
            .collect();

        let mut importances = vec![0.0; p];
        let mut trees = Vec::with_capacity(grown.len());
        for (tree, imp) in grown {
            let total: f64 = imp.iter().sum();
            if total > 0.0 {
                for (acc, v) in importances.iter_mut().zip(&imp) {
                    *acc += v / total;
                }
            }
            trees.push(tree);
        }
        let total: f64 = importances.iter().sum();
        if total > 0.0 {
            importances.iter_mut().for_each(|v| *v /= total);
        }
        Ok(Self { params, n_features: p, trees, importances })
    }

    /// Features sorted by decreasing importance; ties by index.
    pub fn ranked_features(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.n_features).collect();
        idx.sort_by(|&a, &b| self.importances[b].total_cmp(&self.importances[a]).then(a.cmp(&b)));
        idx
    }
}

impl Scorer for RandomForestModel {
    fn score(&self, x: &CsrMatrix) -> Result<Vec<f64>> {
        check_features(self.n_features, x)?;
        let mut dense = vec![0.0; self.n_features];
        let n_trees = self.trees.len() as f64;
        Ok((0..x.n_rows())
            .map(|r| {
                let (cols, vals) = x.row(r);
                for (&c, &v) in cols.iter().zip(vals) {
                    dense[c] = v;
                }
                let votes = self.trees.iter().filter(|t| t.vote(&dense)).count();
                for &c in cols {
                    dense[c] = 0.0;
                }
                votes as f64 / n_trees
            })
            .collect())
    }

    fn default_threshold(&self) -> f64 {
        self.params.threshold
    }
}

struct Grower<'a> {
    x: &'a CsrMatrix,
    cols: CsrMatrix,
    y: &'a [bool],
    max_features: usize,
    bootstrap: bool,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    decrease: f64,
}

/// Per-tree scratch space.
struct Scratch {
    stamp: Vec<u32>,
    value: Vec<f64>,
    perm: Vec<usize>,
    seen: Vec<u32>,
    entries: Vec<(f64, f64, f64)>,
}

fn gini(pos: f64, neg: f64) -> f64 {
    let n = pos + neg;
    if n == 0.0 {
        return 0.0;
    }
    let p = pos / n;
    2.0 * p * (1.0 - p)
}

impl Grower<'_> {
    fn grow(&self, seed: u64) -> (Tree, Vec<f64>) {
        let n = self.y.len();
        let p = self.x.n_cols();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weight = vec![0.0f64; n];
        if self.bootstrap {
            for _ in 0..n {
                weight[rng.random_range(0..n)] += 1.0;
            }
        } else {
            weight.iter_mut().for_each(|w| *w = 1.0);
        }
        let root: Vec<usize> = (0..n).filter(|&i| weight[i] > 0.0).collect();
        let total_weight: f64 = weight.iter().sum();

        let mut scratch = Scratch {
            stamp: vec![0; n],
            value: vec![0.0; n],
            perm: (0..p).collect(),
            seen: vec![0; p],
            entries: Vec::new(),
        };
        let mut importance = vec![0.0; p];
        let mut nodes = vec![TreeNode::Leaf { positive: false }];
        let mut stack = vec![(0usize, root)];
        let mut node_counter = 0u32;

        while let Some((id, samples)) = stack.pop() {
            node_counter += 1;
            let (pos, neg) = samples.iter().fold((0.0, 0.0), |(a, b), &i| {
                if self.y[i] { (a + weight[i], b) } else { (a, b + weight[i]) }
            });
            let leaf = TreeNode::Leaf { positive: pos >= neg };
            if pos == 0.0 || neg == 0.0 || samples.len() < 2 {
                nodes[id] = leaf;
                continue;
            }
            for &i in &samples {
                scratch.stamp[i] = node_counter;
            }
            let Some(best) = self.best_split(&samples, &weight, pos, neg, node_counter, &mut scratch, &mut rng) else {
                nodes[id] = leaf;
                continue;
            };

            let (cols, vals) = self.cols.row(best.feature);
            for (&r, &v) in cols.iter().zip(vals) {
                if scratch.stamp[r] == node_counter {
                    scratch.value[r] = v;
                }
            }
            let (left, right): (Vec<usize>, Vec<usize>) =
                samples.iter().partition(|&&i| scratch.value[i] <= best.threshold);
            for &r in cols {
                scratch.value[r] = 0.0;
            }
            debug_assert!(!left.is_empty() && !right.is_empty());

            importance[best.feature] += best.decrease / total_weight;
            let (l, r) = (nodes.len(), nodes.len() + 1);
            nodes.push(TreeNode::Leaf { positive: false });
            nodes.push(TreeNode::Leaf { positive: false });
            nodes[id] = TreeNode::Split { feature: best.feature, threshold: best.threshold, left: l, right: r };
            stack.push((r, right));
            stack.push((l, left));
        }
        (Tree { nodes }, importance)
    }

    #[allow(clippy::too_many_arguments)]
    fn best_split(
        &self,
        samples: &[usize],
        weight: &[f64],
        pos: f64,
        neg: f64,
        stamp: u32,
        s: &mut Scratch,
        rng: &mut ChaCha8Rng,
    ) -> Option<Candidate> {
        let p = self.x.n_cols();
        let parent = (pos + neg) * gini(pos, neg);
        let mut best: Option<Candidate> = None;
        let mut found = 0usize;
        let mut drawn = 0usize;
        let budget = 4 * self.max_features;

        let consider = |f: usize, s: &mut Scratch, best: &mut Option<Candidate>| -> bool {
            match self.evaluate(f, samples, weight, pos, neg, parent, stamp, s) {
                Some(c) => {
                    if best.as_ref().is_none_or(|b| c.decrease > b.decrease) {
                        *best = Some(c);
                    }
                    true
                }
                None => false,
            }
        };

        // Random draws over all features first.
        while found < self.max_features && drawn < p && drawn < budget {
            let j = rng.random_range(drawn..p);
            s.perm.swap(drawn, j);
            let f = s.perm[drawn];
            drawn += 1;
            if consider(f, s, &mut best) {
                found += 1;
            }
        }
        if found < self.max_features && drawn < p {
            // Remaining draws come from features present in the node.
            for &f in &s.perm[..drawn] {
                s.seen[f] = stamp;
            }
            let mut present = Vec::new();
            for &i in samples {
                for &f in self.x.row(i).0 {
                    if s.seen[f] != stamp {
                        s.seen[f] = stamp;
                        present.push(f);
                    }
                }
            }
            present.sort_unstable();
            let mut k = 0;
            while found < self.max_features && k < present.len() {
                let j = rng.random_range(k..present.len());
                present.swap(k, j);
                if consider(present[k], s, &mut best) {
                    found += 1;
                }
                k += 1;
            }
        }
        best
    }

    /// Best threshold for one feature, or `None` if it is constant in the
    /// node.
    #[allow(clippy::too_many_arguments)]
    fn evaluate(
        &self,
        f: usize,
        samples: &[usize],
        weight: &[f64],
        pos: f64,
        neg: f64,
        parent: f64,
        stamp: u32,
        s: &mut Scratch,
    ) -> Option<Candidate> {
        s.entries.clear();
        let (rows, vals) = self.cols.row(f);
        let (mut nz_pos, mut nz_neg) = (0.0, 0.0);
        if rows.len() <= 4 * samples.len() {
            for (&r, &v) in rows.iter().zip(vals) {
                if s.stamp[r] == stamp {
                    let (a, b) = if self.y[r] { (weight[r], 0.0) } else { (0.0, weight[r]) };
                    s.entries.push((v, a, b));
                    nz_pos += a;
                    nz_neg += b;
                }
            }
        } else {
            for &i in samples {
                let (cols, vals) = self.x.row(i);
                if let Ok(k) = cols.binary_search(&f) {
                    let (a, b) = if self.y[i] { (weight[i], 0.0) } else { (0.0, weight[i]) };
                    s.entries.push((vals[k], a, b));
                    nz_pos += a;
                    nz_neg += b;
                }
            }
        }
        if s.entries.is_empty() {
            return None;
        }
        let (z_pos, z_neg) = (pos - nz_pos, neg - nz_neg);
        if z_pos + z_neg > 0.0 {
            s.entries.push((0.0, z_pos, z_neg));
        }
        s.entries.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut best: Option<Candidate> = None;
        let (mut lp, mut ln) = (0.0, 0.0);
        for k in 0..s.entries.len() - 1 {
            let (v, a, b) = s.entries[k];
            lp += a;
            ln += b;
            let next = s.entries[k + 1].0;
            if next <= v {
                continue;
            }
            let (rp, rn) = (pos - lp, neg - ln);
            let children = (lp + ln) * gini(lp, ln) + (rp + rn) * gini(rp, rn);
            let decrease = (parent - children).max(0.0);
            if best.as_ref().is_none_or(|c| decrease > c.decrease) {
                let mut threshold = 0.5 * (v + next);
                if threshold >= next {
                    threshold = v;
                }
                best = Some(Candidate { feature: f, threshold, decrease });
            }
        }
        best
    }
}
