//! Symmetric-decorrelation FastICA with a tanh contrast function.
//!
//! The whitening step and the (W W^T)^{-1/2} decorrelation both run on a
//! cyclic Jacobi eigensolver, which is plenty for the small mixing
//! dimensions used here (p <= 8).

use ndarray::{Array1, Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

const MAX_ITER: usize = 500;
const TOLERANCE: f64 = 1e-6;

/// Output of [`fastica`].
#[derive(Debug, Clone)]
pub struct IcaResult {
    /// p x p unmixing matrix acting on centered data: sources^T = unmixing * Xc^T.
    pub unmixing: Array2<f64>,
    /// m x p estimated source matrix.
    pub sources: Array2<f64>,
    /// Column means removed before whitening.
    pub mean: Array1<f64>,
    /// Fixed-point iterations used.
    pub iterations: usize,
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns (eigenvalues, eigenvectors as columns).
pub fn sym_eig(a: &Array2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "sym_eig needs a square matrix");
    let mut m = a.clone();
    let mut v: Array2<f64> = Array2::eye(n);
    let frob = m.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[[p, q]] * m[[p, q]];
            }
        }
        if off.sqrt() <= 1e-14 * frob {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for i in 0..n {
                    let mip = m[[i, p]];
                    let miq = m[[i, q]];
                    m[[i, p]] = c * mip - s * miq;
                    m[[i, q]] = s * mip + c * miq;
                }
                for j in 0..n {
                    let mpj = m[[p, j]];
                    let mqj = m[[q, j]];
                    m[[p, j]] = c * mpj - s * mqj;
                    m[[q, j]] = s * mpj + c * mqj;
                }
                for i in 0..n {
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = c * vip - s * viq;
                    v[[i, q]] = s * vip + c * viq;
                }
            }
        }
    }
    (m.diag().to_owned(), v)
}

/// W <- (W W^T)^{-1/2} W.
fn symmetric_decorrelate(w: &Array2<f64>) -> Result<Array2<f64>> {
    let s = w.dot(&w.t());
    let (vals, vecs) = sym_eig(&s);
    let max_val = vals.iter().fold(0.0f64, |acc, v| acc.max(*v));
    if vals.iter().any(|&v| v <= 1e-12 * max_val) {
        return Err(Error::Convergence(
            "fastica: degenerate rotation during decorrelation".into(),
        ));
    }
    let inv_sqrt = Array2::from_diag(&vals.mapv(|v| 1.0 / v.sqrt()));
    Ok(vecs.dot(&inv_sqrt).dot(&vecs.t()).dot(w))
}

/// FastICA on an m x p data matrix. Deterministic for a fixed seed.
pub fn fastica(x: &Array2<f64>, seed: u64) -> Result<IcaResult> {
    let (m, p) = x.dim();
    if p < 2 {
        return Err(Error::Input("fastica: need at least two columns".into()));
    }
    if m < p + 1 {
        return Err(Error::Size(format!(
            "fastica: {m} samples insufficient for {p} components"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("fastica: non-finite entries".into()));
    }

    let mean = x.mean_axis(Axis(0)).expect("m >= 1");
    let centered = x - &mean.clone().insert_axis(Axis(0));

    let cov = centered.t().dot(&centered) / (m as f64 - 1.0);
    let (vals, vecs) = sym_eig(&cov);
    let max_val = vals.iter().fold(0.0f64, |acc, v| acc.max(*v));
    if max_val <= 0.0 || vals.iter().any(|&v| v <= 1e-12 * max_val) {
        return Err(Error::Input("fastica: rank-deficient covariance".into()));
    }
    // Whitening matrix K = D^{-1/2} E^T; whitened data Xw = Xc K^T.
    let d_inv_sqrt = Array2::from_diag(&vals.mapv(|v| 1.0 / v.sqrt()));
    let k = d_inv_sqrt.dot(&vecs.t());
    let xw = centered.dot(&k.t());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init = Array2::from_shape_fn((p, p), |_| StandardNormal.sample(&mut rng));
    let mut w = symmetric_decorrelate(&init)?;

    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITER {
        iterations += 1;
        // u = Xw W^T, column i = current estimate of source i.
        let u = xw.dot(&w.t());
        let g = u.mapv(f64::tanh);
        let g_prime_mean = g.mapv(|v| 1.0 - v * v).mean_axis(Axis(0)).expect("m >= 1");
        // Fixed-point update per row: w_i <- E[xw g(u_i)] - E[g'(u_i)] w_i.
        let mut w_new = g.t().dot(&xw) / m as f64;
        for i in 0..p {
            for j in 0..p {
                w_new[[i, j]] -= g_prime_mean[i] * w[[i, j]];
            }
        }
        let w_new = symmetric_decorrelate(&w_new)?;

        let overlap = w_new.dot(&w.t());
        let delta = (0..p)
            .map(|i| (1.0 - overlap[[i, i]].abs()).abs())
            .fold(0.0f64, f64::max);
        w = w_new;
        if delta < TOLERANCE {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence(format!(
            "fastica: no convergence after {MAX_ITER} iterations"
        )));
    }

    let unmixing = w.dot(&k);
    let sources = centered.dot(&unmixing.t());
    Ok(IcaResult {
        unmixing,
        sources,
        mean,
        iterations,
    })
}
