//! Classification metrics, signed-rank tests and false-discovery-rate
//! adjustment.

mod metrics;
mod wilcoxon;

pub use metrics::{confusion, metrics, Confusion, MetricRow};
pub use wilcoxon::{midranks, wilcoxon_one_sample, wilcoxon_paired, SignedRankResult, EXACT_MAX_N};

use crate::error::{Error, Result};

/// Benjamini–Yekutieli adjusted p-values, in input order.
pub fn benjamini_yekutieli(p: &[f64]) -> Result<Vec<f64>> {
    if p.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::invalid("p-values must lie in [0, 1]"));
    }
    let m = p.len();
    let c: f64 = (1..=m).map(|k| 1.0 / k as f64).sum();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]).then(a.cmp(&b)));
    let mut adjusted = vec![0.0; m];
    let mut running = 1.0f64;
    for (rank, &i) in order.iter().enumerate().rev() {
        let v = m as f64 * c * p[i] / (rank + 1) as f64;
        running = running.min(v);
        adjusted[i] = running.min(1.0);
    }
    Ok(adjusted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_value_unchanged() {
        assert_eq!(benjamini_yekutieli(&[0.037]).unwrap(), vec![0.037]);
    }

    #[test]
    fn hand_computed_step_up() {
        let adj = benjamini_yekutieli(&[0.02, 0.01, 0.03]).unwrap();
        for a in adj {
            assert!((a - 3.0 * (11.0 / 6.0) * 0.01).abs() < 1e-15);
        }
    }

    #[test]
    fn one_stays_one() {
        let adj = benjamini_yekutieli(&[0.001, 1.0, 0.5]).unwrap();
        assert_eq!(adj[1], 1.0);
        assert!(benjamini_yekutieli(&[1.5]).is_err());
    }

    proptest! {
        #[test]
        fn monotone_and_permutation_equivariant(p in prop::collection::vec(0.0f64..=1.0, 1..20), rot in 0usize..20) {
            let adj = benjamini_yekutieli(&p).unwrap();
            let mut idx: Vec<usize> = (0..p.len()).collect();
            idx.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
            for w in idx.windows(2) {
                prop_assert!(adj[w[0]] <= adj[w[1]]);
            }
            let k = rot % p.len();
            let mut q = p.clone();
            q.rotate_left(k);
            let mut expected = adj.clone();
            expected.rotate_left(k);
            prop_assert_eq!(benjamini_yekutieli(&q).unwrap(), expected);
        }
    }
}
