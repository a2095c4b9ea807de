//! Seeded randomized truncated SVD for sparse matrices.
//!
//! Range finding uses a Gaussian test matrix with oversampling and power
//! iterations. The small projected
//! problem is solved through the eigendecomposition of `B Bᵀ` with cyclic
//! Jacobi rotations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, DenseMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SvdParams {
    pub n_oversample: usize,
    pub n_power_iters: usize,
}

impl Default for SvdParams {
    fn default() -> Self {
        Self { n_oversample: 10, n_power_iters: 4 }
    }
}

/// `M ≈ U diag(S) Vt` with `U: n×d`, `Vt: d×m`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSvd {
    pub u: DenseMatrix,
    pub s: Vec<f64>,
    pub vt: DenseMatrix,
}

impl TruncatedSvd {
    /// Number of singular values above a relative cutoff of the largest.
    pub fn numerical_rank(&self) -> usize {
        let top = self.s.first().copied().unwrap_or(0.0);
        if top == 0.0 {
            return 0;
        }
        // sqrt of the Gram eigenvalue precision
        let tol = top * 1e-7;
        self.s.iter().filter(|&&s| s > tol).count()
    }

    /// `U diag(S) Vt` as a dense matrix.
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (x, s) in us.row_mut(i).iter_mut().zip(&self.s) {
                *x *= s;
            }
        }
        us.matmul(&self.vt).expect("factor shapes agree")
    }
}

pub fn truncated_svd(m: &CsrMatrix, d: usize, seed: u64, params: SvdParams) -> Result<TruncatedSvd> {
    let (n, p) = (m.n_rows(), m.n_cols());
    let full = n.min(p);
    if d == 0 || d > full {
        return Err(Error::invalid(format!("rank {d} outside 1..={full}")));
    }
    let k = (d + params.n_oversample).min(full);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut omega = DenseMatrix::zeros(p, k);
    for i in 0..p {
        for x in omega.row_mut(i) {
            *x = StandardNormal.sample(&mut rng);
        }
    }
    let mut q = m.mul_dense(&omega)?;
    orthonormalize(&mut q, &mut rng);
    // Q is re-orthonormalized after every application of M Mᵀ; the
    // n_features × k intermediate is not, which keeps the cost linear in
    // n_features.
    for _ in 0..params.n_power_iters {
        let z = m.tmul_dense(&q)?;
        q = m.mul_dense(&z)?;
        orthonormalize(&mut q, &mut rng);
    }

    // Bᵀ = Mᵀ Q, so B Bᵀ = (Mᵀ Q)ᵀ (Mᵀ Q)
    let bt = m.tmul_dense(&q)?;
    let (eigvals, w) = symmetric_eigen(&bt.gram());
    let s_all: Vec<f64> = eigvals.iter().map(|&l| l.max(0.0).sqrt()).collect();

    let u_all = q.matmul(&w)?;
    let v_all = bt.matmul(&w)?;
    let cutoff = s_all[0] * 1e-10;
    let mut v = DenseMatrix::zeros(p, d);
    let mut degenerate = Vec::new();
    for j in 0..d {
        if s_all[j] > cutoff && s_all[j] > 0.0 {
            let nrm = column_norm(&v_all, j);
            for i in 0..p {
                v[(i, j)] = v_all[(i, j)] / nrm;
            }
        } else {
            degenerate.push(j);
        }
    }
    if !degenerate.is_empty() {
        complete_columns(&mut v, &degenerate, &mut rng);
    }

    // ‖M v‖ is second-order accurate in the error of v, unlike sqrt of the
    // Gram eigenvalue.
    let refined: Vec<f64> = (0..d)
        .map(|j| m.spmv(&v.column(j)).map(|mv| crate::linalg::norm(&mv)))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| refined[b].total_cmp(&refined[a]).then(a.cmp(&b)));
    let s: Vec<f64> = order.iter().map(|&j| refined[j]).collect();
    let mut u = DenseMatrix::zeros(n, d);
    let mut v_sorted = DenseMatrix::zeros(p, d);
    for (new, &old) in order.iter().enumerate() {
        for i in 0..n {
            u[(i, new)] = u_all[(i, old)];
        }
        for i in 0..p {
            v_sorted[(i, new)] = v[(i, old)];
        }
    }
    let mut v = v_sorted;

    // Largest-magnitude entry of each right singular vector is positive.
    for j in 0..d {
        let mut best = 0usize;
        for i in 1..p {
            if v[(i, j)].abs() > v[(best, j)].abs() {
                best = i;
            }
        }
        if v[(best, j)] < 0.0 {
            for i in 0..p {
                v[(i, j)] = -v[(i, j)];
            }
            for i in 0..n {
                u[(i, j)] = -u[(i, j)];
            }
        }
    }
    Ok(TruncatedSvd { u, s, vt: v.transpose() })
}

/// Modified Gram-Schmidt with a second pass. Columns that collapse are
/// replaced by random directions so the result always has orthonormal
/// columns.
fn orthonormalize(a: &mut DenseMatrix, rng: &mut ChaCha8Rng) {
    let (n, k) = (a.rows(), a.cols());
    for j in 0..k {
        let original = column_norm(a, j);
        for attempt in 0..4 {
            for _ in 0..2 {
                for prev in 0..j {
                    let proj: f64 = (0..n).map(|i| a[(i, prev)] * a[(i, j)]).sum();
                    for i in 0..n {
                        let delta = proj * a[(i, prev)];
                        a[(i, j)] -= delta;
                    }
                }
            }
            let nrm = column_norm(a, j);
            if nrm > 1e-10 * original.max(f64::MIN_POSITIVE) && nrm > 1e-300 {
                for i in 0..n {
                    a[(i, j)] /= nrm;
                }
                break;
            }
            if attempt == 3 {
                // n < k: no direction left, leave a zero column.
                for i in 0..n {
                    a[(i, j)] = 0.0;
                }
                break;
            }
            for i in 0..n {
                a[(i, j)] = StandardNormal.sample(rng);
            }
        }
    }
}

fn complete_columns(v: &mut DenseMatrix, cols: &[usize], rng: &mut ChaCha8Rng) {
    let (n, k) = (v.rows(), v.cols());
    for &j in cols {
        loop {
            for i in 0..n {
                v[(i, j)] = StandardNormal.sample(rng);
            }
            for _ in 0..2 {
                for other in (0..k).filter(|&o| o != j && (!cols.contains(&o) || o < j)) {
                    let proj: f64 = (0..n).map(|i| v[(i, other)] * v[(i, j)]).sum();
                    for i in 0..n {
                        let delta = proj * v[(i, other)];
                        v[(i, j)] -= delta;
                    }
                }
            }
            let nrm = column_norm(v, j);
            if nrm > 1e-8 {
                for i in 0..n {
                    v[(i, j)] /= nrm;
                }
                break;
            }
        }
    }
}

fn column_norm(a: &DenseMatrix, j: usize) -> f64 {
    (0..a.rows()).map(|i| a[(i, j)] * a[(i, j)]).sum::<f64>().sqrt()
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues in nonincreasing order and the matching
/// eigenvectors as columns.
pub fn symmetric_eigen(a: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let n = a.rows();
    let mut a = a.clone();
    let mut v = DenseMatrix::identity(n);
    let scale = a.frobenius_norm();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let vals = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vecs = DenseMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vecs[(k, new)] = v[(k, old)];
        }
    }
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(vals: &[f64]) -> CsrMatrix {
        CsrMatrix::from_triplets(vals.len(), vals.len(), vals.iter().enumerate().map(|(i, &v)| (i, i, v)))
            .unwrap()
    }

    #[test]
    fn identity_rank_two() {
        let svd = truncated_svd(&CsrMatrix::identity(3), 2, 0, SvdParams::default()).unwrap();
        assert!((svd.s[0] - 1.0).abs() < 1e-12 && (svd.s[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_values_exact() {
        let svd = truncated_svd(&diag(&[3.0, 2.0, 1.0]), 2, 7, SvdParams::default()).unwrap();
        assert_eq!(svd.s, vec![3.0, 2.0]);
        // sign convention: largest entry of each right vector positive
        assert!(svd.vt[(0, 0)] > 0.0 && svd.vt[(1, 1)] > 0.0);
    }

    #[test]
    fn rank_out_of_range() {
        assert!(truncated_svd(&CsrMatrix::identity(3), 0, 0, SvdParams::default()).is_err());
        assert!(truncated_svd(&CsrMatrix::identity(3), 4, 0, SvdParams::default()).is_err());
    }

    #[test]
    fn zero_matrix_still_orthonormal() {
        let svd = truncated_svd(&CsrMatrix::zeros(4, 3), 2, 1, SvdParams::default()).unwrap();
        assert_eq!(svd.s, vec![0.0, 0.0]);
        assert_eq!(svd.numerical_rank(), 0);
        let vvt = svd.vt.matmul(&svd.vt.transpose()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((vvt[(i, j)] - want).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn eigen_of_small_symmetric() {
        let a = DenseMatrix::from_vec(2, 2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let (vals, _) = symmetric_eigen(&a);
        assert!((vals[0] - 3.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
    }
}
