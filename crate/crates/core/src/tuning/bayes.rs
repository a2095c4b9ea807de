//! Bayesian optimization with a Gaussian-process surrogate and expected
//! improvement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use super::gp::Gp;
use super::{Assignment, Evaluation, SearchSpace, TuneResult};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BayesParams {
    pub n_iter: usize,
    pub n_init: usize,
    pub seed: u64,
}

impl BayesParams {
    pub fn new(n_iter: usize, seed: u64) -> Self {
        Self { n_iter, n_init: 5, seed }
    }
}

const N_CANDIDATES: usize = 500;
const N_STARTS: usize = 5;

/// Minimizes `objective` over `space` with `n_init` uniform random points
/// followed by `n_iter` expected-improvement steps. A failing evaluation
/// is recorded as one more than the worst error seen so far.
///
/// Random draws do not depend on `n_iter`, so a longer run extends a
/// shorter one with the same seed.
pub fn bayes_opt<F>(space: &SearchSpace, params: BayesParams, mut objective: F) -> Result<TuneResult>
where
    F: FnMut(&Assignment) -> Result<f64>,
{
    let d = space.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut xs: Vec<Vec<f64>> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    let mut log = Vec::new();

    let mut evaluate = |u: Vec<f64>, xs: &mut Vec<Vec<f64>>, ys: &mut Vec<f64>, log: &mut Vec<Evaluation>| {
        let snapped: Vec<f64> = space.params().iter().zip(&u).map(|(p, &v)| p.domain.snap_unit(v)).collect();
        let point = space.assignment_from_unit(&snapped);
        let error = match objective(&point) {
            Ok(e) if e.is_finite() => e,
            _ => ys.iter().copied().fold(0.0f64, f64::max) + 1.0,
        };
        xs.push(snapped);
        ys.push(error);
        log.push(Evaluation { point, error });
    };

    for _ in 0..params.n_init.max(1) {
        let u: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        evaluate(u, &mut xs, &mut ys, &mut log);
    }
    for _ in 0..params.n_iter {
        let candidates: Vec<Vec<f64>> = (0..N_CANDIDATES).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
        let next = propose(&xs, &ys, candidates);
        evaluate(next, &mut xs, &mut ys, &mut log);
    }
    TuneResult::from_log(log)
}

/// Maximizes expected improvement: score random candidates, then refine
/// the best few and the incumbent by coordinate pattern search.
fn propose(xs: &[Vec<f64>], ys: &[f64], candidates: Vec<Vec<f64>>) -> Vec<f64> {
    let n = ys.len() as f64;
    let mean = ys.iter().sum::<f64>() / n;
    let sd = (ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n).sqrt();
    let sd = if sd > 0.0 { sd } else { 1.0 };
    let z: Vec<f64> = ys.iter().map(|y| (y - mean) / sd).collect();
    let best = z.iter().copied().fold(f64::INFINITY, f64::min);
    let Some(gp) = Gp::fit(xs, &z) else {
        return candidates.into_iter().next().expect("candidates are nonempty");
    };
    let normal = Normal::standard();
    let ei = |q: &[f64]| {
        let (mu, var) = gp.predict(q);
        let s = var.sqrt();
        if s < 1e-12 {
            return (best - mu).max(0.0);
        }
        let t = (best - mu) / s;
        (best - mu) * normal.cdf(t) + s * normal.pdf(t)
    };

    let mut scored: Vec<(f64, Vec<f64>)> = candidates.into_iter().map(|c| (ei(&c), c)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let incumbent = xs[z.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0)].clone();
    let mut starts: Vec<(f64, Vec<f64>)> = scored.into_iter().take(N_STARTS).collect();
    starts.push((ei(&incumbent), incumbent));

    let mut winner = starts[0].clone();
    for (mut value, mut x) in starts {
        let mut step = 0.1;
        while step > 1e-4 {
            let mut improved = false;
            for j in 0..x.len() {
                for dir in [1.0, -1.0] {
                    let mut trial = x.clone();
                    trial[j] = (trial[j] + dir * step).clamp(0.0, 1.0);
                    let v = ei(&trial);
                    if v > value {
                        value = v;
                        x = trial;
                        improved = true;
                    }
                }
            }
            if !improved {
                step /= 2.0;
            }
        }
        if value > winner.0 {
            winner = (value, x);
        }
    }
    winner.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::tuning::Domain;

    #[test]
    fn finds_parabola_minimum() {
        let space = SearchSpace::of([("x", Domain::linear(0.0, 1.0))]).unwrap();
        let r = bayes_opt(&space, BayesParams::new(30, 7), |a| Ok((a["x"] - 0.3).powi(2))).unwrap();
        assert!((r.best["x"] - 0.3).abs() < 0.05, "{:?}", r.best);
        assert_eq!(r.log.len(), 35);
    }

    #[test]
    fn zero_iterations_returns_best_initial_point() {
        let space = SearchSpace::of([("x", Domain::linear(0.0, 1.0))]).unwrap();
        let r = bayes_opt(&space, BayesParams::new(0, 3), |a| Ok(a["x"])).unwrap();
        assert_eq!(r.log.len(), 5);
        let min = r.log.iter().map(|e| e.error).fold(f64::INFINITY, f64::min);
        assert_eq!(r.best_error, min);
    }

    #[test]
    fn longer_runs_extend_shorter_ones() {
        let space = SearchSpace::of([("a", Domain::linear(-1.0, 1.0)), ("b", Domain::Discrete(vec![1.0, 2.0, 4.0]))])
            .unwrap();
        let f = |p: &Assignment| Ok((p["a"] - 0.2).abs() + (p["b"] - 2.0).abs());
        let short = bayes_opt(&space, BayesParams::new(4, 11), f).unwrap();
        let long = bayes_opt(&space, BayesParams::new(8, 11), f).unwrap();
        assert_eq!(short.log[..], long.log[..9]);
        assert!(long.best_error <= short.best_error);
        assert!(long.log.iter().all(|e| [1.0, 2.0, 4.0].contains(&e.point["b"])));
    }

    #[test]
    fn failures_score_worst_plus_one() {
        let space = SearchSpace::of([("x", Domain::linear(0.0, 1.0))]).unwrap();
        let mut calls = 0;
        let r = bayes_opt(&space, BayesParams::new(2, 1), |a| {
            calls += 1;
            if calls == 3 { Err(Error::invalid("fail")) } else { Ok(a["x"]) }
        })
        .unwrap();
        let worst = r.log[..2].iter().map(|e| e.error).fold(0.0, f64::max);
        assert_eq!(r.log[2].error, worst + 1.0);
    }
}
