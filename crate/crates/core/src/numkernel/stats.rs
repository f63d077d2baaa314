//! Correlation and hypothesis-test helpers backing the discovery algorithms.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, Normal};

use crate::error::{Error, Result};
use crate::numkernel::linalg::least_squares;

/// Pearson correlation of the residuals of `x` and `y` after regressing
/// each on an intercept plus the columns of `z`. Clamped to [-1, 1].
pub fn partial_correlation(
    x: ArrayView1<f64>,
    y: ArrayView1<f64>,
    z: ArrayView2<f64>,
) -> Result<f64> {
    let m = x.len();
    if y.len() != m || (z.ncols() > 0 && z.nrows() != m) {
        return Err(Error::Size(
            "partial_correlation: x, y and Z rows must have equal length".into(),
        ));
    }
    let q = z.ncols();
    if m <= q + 2 {
        return Err(Error::Size(format!(
            "partial_correlation: need m > q + 2 (m = {m}, q = {q})"
        )));
    }

    let mut design = Array2::ones((m, q + 1));
    if q > 0 {
        design.slice_mut(s![.., 1..]).assign(&z);
    }
    let rx = residual(&design, x)?;
    let ry = residual(&design, y)?;

    let nx = rx.dot(&rx).sqrt();
    let ny = ry.dot(&ry).sqrt();
    let scale_x = 1.0 + x.dot(&x).sqrt();
    let scale_y = 1.0 + y.dot(&y).sqrt();
    if nx <= 1e-8 * scale_x || ny <= 1e-8 * scale_y {
        return Err(Error::UndefinedCorrelation(
            "zero-variance residual after conditioning".into(),
        ));
    }
    Ok((rx.dot(&ry) / (nx * ny)).clamp(-1.0, 1.0))
}

fn residual(design: &Array2<f64>, v: ArrayView1<f64>) -> Result<Array1<f64>> {
    let coef = least_squares(design.view(), v)?;
    Ok(&v.to_owned() - &design.dot(&coef))
}

/// Fisher-z conditional independence decision.
///
/// Returns `true` (independent) iff sqrt(m - q - 3) * |atanh(r)| stays at or
/// below the two-sided normal critical value for `alpha`.
pub fn fisher_z_independent(r: f64, m: usize, q: usize, alpha: f64) -> Result<bool> {
    if m <= q + 3 {
        return Err(Error::Size(format!(
            "fisher_z: need m - q - 3 > 0 (m = {m}, q = {q})"
        )));
    }
    if !(0.0..1.0).contains(&alpha) || alpha == 0.0 {
        return Err(Error::Input(format!("fisher_z: alpha must be in (0,1), got {alpha}")));
    }
    if !r.is_finite() || r.abs() > 1.0 + 1e-12 {
        return Err(Error::Input(format!("fisher_z: |r| must be <= 1, got {r}")));
    }
    let r = r.clamp(-(1.0 - 1e-15), 1.0 - 1e-15);
    let stat = ((m - q - 3) as f64).sqrt() * r.atanh().abs();
    let crit = Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(1.0 - alpha / 2.0);
    Ok(stat <= crit)
}

/// Nested-model F test. Returns `true` iff the restricted model is rejected
/// (the extra regressors are significant at `alpha`).
pub fn f_test_nested(
    rss_restricted: f64,
    rss_full: f64,
    df_extra: usize,
    df_resid: usize,
    alpha: f64,
) -> Result<bool> {
    if rss_full < 0.0 || rss_restricted < 0.0 {
        return Err(Error::Input("f_test: negative residual sum of squares".into()));
    }
    if rss_restricted < rss_full - 1e-12 {
        return Err(Error::Input(
            "f_test: restricted RSS below full RSS beyond tolerance".into(),
        ));
    }
    if df_extra == 0 || df_resid == 0 {
        return Err(Error::Size("f_test: degrees of freedom must be >= 1".into()));
    }
    if !(0.0..1.0).contains(&alpha) || alpha == 0.0 {
        return Err(Error::Input(format!("f_test: alpha must be in (0,1), got {alpha}")));
    }

    if rss_full == 0.0 {
        // Perfect full fit: significant exactly when the restricted model is not.
        return Ok(rss_restricted > 0.0);
    }
    let diff = (rss_restricted - rss_full).max(0.0);
    let f_stat = (diff / df_extra as f64) / (rss_full / df_resid as f64);
    let dist = FisherSnedecor::new(df_extra as f64, df_resid as f64)
        .map_err(|e| Error::Input(format!("f_test: {e}")))?;
    Ok(dist.cdf(f_stat) > 1.0 - alpha)
}
