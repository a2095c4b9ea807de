//! Gaussian-process regression with a Matérn-5/2 kernel and an isotropic
//! length scale fitted by profiled maximum likelihood.

/// Diagonal jitter relative to the signal variance.
pub(crate) const NOISE: f64 = 1e-6;

fn matern52(r: f64, length: f64) -> f64 {
    let s = 5f64.sqrt() * r / length;
    (1.0 + s + s * s / 3.0) * (-s).exp()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Lower Cholesky factor of a row-major `n × n` matrix, or `None` if it is
/// not positive definite.
fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

fn forward_sub(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            x[i] -= l[i * n + k] * x[k];
        }
        x[i] /= l[i * n + i];
    }
    x
}

fn backward_sub(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        for k in i + 1..n {
            x[i] -= l[k * n + i] * x[k];
        }
        x[i] /= l[i * n + i];
    }
    x
}

pub(crate) struct Gp {
    x: Vec<Vec<f64>>,
    chol: Vec<f64>,
    alpha: Vec<f64>,
    sigma2: f64,
    length: f64,
}

struct Factored {
    chol: Vec<f64>,
    alpha: Vec<f64>,
    sigma2: f64,
    log_lik: f64,
}

fn factor(x: &[Vec<f64>], y: &[f64], length: f64) -> Option<Factored> {
    let n = x.len();
    let mut jitter = NOISE;
    while jitter <= 1e-2 {
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                k[i * n + j] = matern52(distance(&x[i], &x[j]), length);
            }
            k[i * n + i] += jitter;
        }
        if let Some(chol) = cholesky(&k, n) {
            let alpha = backward_sub(&chol, n, &forward_sub(&chol, n, y));
            let quad: f64 = y.iter().zip(&alpha).map(|(a, b)| a * b).sum();
            let sigma2 = (quad / n as f64).max(1e-12);
            let log_det: f64 = (0..n).map(|i| chol[i * n + i].ln()).sum();
            let log_lik = -0.5 * n as f64 * sigma2.ln() - log_det;
            return Some(Factored { chol, alpha, sigma2, log_lik });
        }
        jitter *= 10.0;
    }
    None
}

impl Gp {
    /// Fits the length scale over `[0.01, 10]` in log space: a coarse grid,
    /// then golden-section refinement around the best grid point.
    pub(crate) fn fit(x: &[Vec<f64>], y: &[f64]) -> Option<Self> {
        let ll = |log_len: f64| factor(x, y, 10f64.powf(log_len)).map_or(f64::NEG_INFINITY, |f| f.log_lik);
        let grid: Vec<f64> = (0..=30).map(|i| -2.0 + i as f64 * 0.1).collect();
        let mut best = 0;
        let mut best_ll = f64::NEG_INFINITY;
        for (i, &g) in grid.iter().enumerate() {
            let v = ll(g);
            if v > best_ll {
                best_ll = v;
                best = i;
            }
        }
        let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(grid.len() - 1)]);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let (mut fc, mut fd) = (ll(c), ll(d));
        for _ in 0..30 {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = ll(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = ll(d);
            }
        }
        let mut log_len = 0.5 * (a + b);
        if ll(log_len) < best_ll {
            log_len = grid[best];
        }
        let length = 10f64.powf(log_len);
        let f = factor(x, y, length)?;
        Some(Self { x: x.to_vec(), chol: f.chol, alpha: f.alpha, sigma2: f.sigma2, length })
    }

    /// Posterior mean and variance at `q`.
    pub(crate) fn predict(&self, q: &[f64]) -> (f64, f64) {
        let n = self.x.len();
        let k: Vec<f64> = self.x.iter().map(|xi| matern52(distance(xi, q), self.length)).collect();
        let mean: f64 = k.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
        let v = forward_sub(&self.chol, n, &k);
        let reduction: f64 = v.iter().map(|a| a * a).sum();
        (mean, (self.sigma2 * (1.0 - reduction)).max(0.0))
    }

    #[cfg(test)]
    pub(crate) fn length(&self) -> f64 {
        self.length
    }
}
