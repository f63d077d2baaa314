//! Dense least squares via column-pivoted Householder QR.
//!
//! Rank-deficient systems get the minimum-norm solution: after truncating
//! to the numerical rank r, the remaining underdetermined triangular system
//! `R1 y = c` is solved through the normal equations of its transpose,
//! which is exact for full-row-rank `R1`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Row-major dense matrix carrier used throughout the crate.
pub type Matrix = Array2<f64>;

struct PivotedQr {
    /// Householder vectors below the diagonal (scaled so v[j] = 1), R on and above.
    qr: Array2<f64>,
    taus: Vec<f64>,
    /// perm[j] = original column index occupying position j.
    perm: Vec<usize>,
    rank: usize,
}

fn factor(a: ArrayView2<f64>) -> PivotedQr {
    let (m, k) = a.dim();
    let mut qr = a.to_owned();
    let steps = m.min(k);
    let mut taus = vec![0.0; steps];
    let mut perm: Vec<usize> = (0..k).collect();
    let mut rank = 0;
    let mut r00 = 0.0;

    for j in 0..steps {
        // Select the pivot column by largest remaining norm.
        let mut best = j;
        let mut best_norm2 = -1.0;
        for c in j..k {
            let n2: f64 = (j..m).map(|i| qr[[i, c]] * qr[[i, c]]).sum();
            if n2 > best_norm2 {
                best_norm2 = n2;
                best = c;
            }
        }
        if best != j {
            for i in 0..m {
                qr.swap([i, j], [i, best]);
            }
            perm.swap(j, best);
        }
        let norm = best_norm2.max(0.0).sqrt();
        if j == 0 {
            r00 = norm;
        }
        let tol = r00 * (m.max(k) as f64) * f64::EPSILON * 8.0;
        if norm <= tol || norm == 0.0 {
            break;
        }
        rank = j + 1;

        // Householder vector for column j, rows j..m.
        let x0 = qr[[j, j]];
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        let v0 = x0 - alpha;
        let tau = -v0 / alpha;
        qr[[j, j]] = alpha;
        for i in (j + 1)..m {
            qr[[i, j]] /= v0;
        }
        taus[j] = tau;

        // Apply H = I - tau v v^T to the trailing columns.
        for c in (j + 1)..k {
            let mut w = qr[[j, c]];
            for i in (j + 1)..m {
                w += qr[[i, j]] * qr[[i, c]];
            }
            w *= tau;
            qr[[j, c]] -= w;
            for i in (j + 1)..m {
                let vij = qr[[i, j]];
                qr[[i, c]] -= w * vij;
            }
        }
    }

    PivotedQr {
        qr,
        taus,
        perm,
        rank,
    }
}

fn apply_qt(f: &PivotedQr, b: &mut Array1<f64>) {
    let m = f.qr.nrows();
    for j in 0..f.rank {
        let tau = f.taus[j];
        let mut w = b[j];
        for i in (j + 1)..m {
            w += f.qr[[i, j]] * b[i];
        }
        w *= tau;
        b[j] -= w;
        for i in (j + 1)..m {
            b[i] -= w * f.qr[[i, j]];
        }
    }
}

fn solve_upper_triangular(f: &PivotedQr, c: &ArrayView1<f64>) -> Array1<f64> {
    let r = f.rank;
    let mut y = Array1::zeros(r);
    for i in (0..r).rev() {
        let mut s = c[i];
        for j in (i + 1)..r {
            s -= f.qr[[i, j]] * y[j];
        }
        y[i] = s / f.qr[[i, i]];
    }
    y
}

/// Minimum-norm solution of the underdetermined full-row-rank system
/// `R1 y = c` with `R1 = qr[0..r, 0..k]` upper trapezoidal.
fn solve_min_norm(f: &PivotedQr, c: &ArrayView1<f64>) -> Result<Array1<f64>> {
    let r = f.rank;
    let k = f.qr.ncols();
    // G = R1 R1^T, r x r symmetric positive definite.
    let mut g = Array2::zeros((r, r));
    for i in 0..r {
        for j in i..r {
            let mut s = 0.0;
            for col in j..k {
                s += f.qr[[i, col]] * f.qr[[j, col]];
            }
            g[[i, j]] = s;
            g[[j, i]] = s;
        }
    }
    let z = cholesky_solve(&g, c)?;
    // y = R1^T z.
    let mut y = Array1::zeros(k);
    for col in 0..k {
        let mut s = 0.0;
        for i in 0..r.min(col + 1) {
            s += f.qr[[i, col]] * z[i];
        }
        y[col] = s;
    }
    Ok(y)
}

fn cholesky_solve(g: &Array2<f64>, b: &ArrayView1<f64>) -> Result<Array1<f64>> {
    let n = g.nrows();
    let mut l = g.clone();
    for j in 0..n {
        for i in j..n {
            let mut s = l[[i, j]];
            for p in 0..j {
                s -= l[[i, p]] * l[[j, p]];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::Input(
                        "rank-truncated system lost positive definiteness".into(),
                    ));
                }
                l[[j, j]] = s.sqrt();
            } else {
                l[[i, j]] = s / l[[j, j]];
            }
        }
    }
    let mut y = b.to_owned();
    for i in 0..n {
        for p in 0..i {
            let lip = l[[i, p]];
            y[i] -= lip * y[p];
        }
        y[i] /= l[[i, i]];
    }
    for i in (0..n).rev() {
        for p in (i + 1)..n {
            let lpi = l[[p, i]];
            y[i] -= lpi * y[p];
        }
        y[i] /= l[[i, i]];
    }
    Ok(y)
}

fn check_finite_matrix(a: &ArrayView2<f64>, name: &str) -> Result<()> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input(format!("{name} contains non-finite entries")));
    }
    Ok(())
}

fn check_finite_vector(v: &ArrayView1<f64>, name: &str) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Input(format!("{name} contains non-finite entries")));
    }
    Ok(())
}

/// Least-squares minimizer of ||A x - b||_2; minimum-norm when A is
/// numerically rank deficient.
pub fn least_squares(a: ArrayView2<f64>, b: ArrayView1<f64>) -> Result<Array1<f64>> {
    let (m, k) = a.dim();
    if m == 0 || k == 0 {
        return Err(Error::Size("least_squares requires m >= 1 and k >= 1".into()));
    }
    if b.len() != m {
        return Err(Error::Size(format!(
            "least_squares: A has {m} rows but b has {} entries",
            b.len()
        )));
    }
    check_finite_matrix(&a, "A")?;
    check_finite_vector(&b, "b")?;

    let f = factor(a);
    let mut qtb = b.to_owned();
    apply_qt(&f, &mut qtb);
    let c = qtb.slice(ndarray::s![..f.rank]).to_owned();

    let y = if f.rank == k {
        solve_upper_triangular(&f, &c.view())
    } else if f.rank == 0 {
        Array1::zeros(k)
    } else {
        solve_min_norm(&f, &c.view())?
    };

    let mut x = Array1::zeros(k);
    for (pos, &orig) in f.perm.iter().enumerate() {
        if pos < y.len() {
            x[orig] = y[pos];
        }
    }
    Ok(x)
}

/// Residual sum of squares ||A x - b||_2^2.
pub fn residual_sum_of_squares(a: ArrayView2<f64>, b: ArrayView1<f64>, x: ArrayView1<f64>) -> f64 {
    let r = &a.dot(&x) - &b;
    r.dot(&r)
}
