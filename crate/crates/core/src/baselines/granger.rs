//! Bivariate Granger causality over all ordered variable pairs.

use ndarray::{Array1, Array2};

use crate::baselines::BaselineParams;
use crate::causal::CausalGraph;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::numkernel::{f_test_nested, least_squares};

/// Edge (i, j) is set when adding lags of variable j significantly improves
/// the autoregression of variable i. The diagonal records whether a
/// variable's own lags are jointly significant against a constant-only
/// model.
pub fn granger(traj: &Trajectory, params: &BaselineParams) -> Result<CausalGraph> {
    params.validate()?;
    traj.validate()?;
    let lag = params.granger_max_lag;
    let alpha = params.granger_alpha;
    let m = traj.n_samples();
    let p = traj.n_vars();
    if m <= 2 * lag + 10 {
        return Err(Error::Size(format!(
            "granger: need m > 2 * max_lag + 10 (m = {m}, max_lag = {lag})"
        )));
    }

    let n = m - lag; // regression sample count
    let mut graph = CausalGraph::empty(traj.var_names.clone());

    // Constant series produce singular autoregressions; they get no edges.
    let degenerate: Vec<bool> = traj
        .var_names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let col = traj.states.column(j);
            let mean = col.sum() / m as f64;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
            let flat = var <= 1e-12 * (1.0 + mean * mean) * m as f64;
            if flat {
                log::warn!("granger: variable {name} is constant; skipping its edges");
            }
            flat
        })
        .collect();

    let target = |i: usize| -> Array1<f64> {
        Array1::from_iter((lag..m).map(|t| traj.states[[t, i]]))
    };
    let fill_lags = |design: &mut Array2<f64>, col0: usize, var: usize| {
        for (row, t) in (lag..m).enumerate() {
            for l in 1..=lag {
                design[[row, col0 + l - 1]] = traj.states[[t - l, var]];
            }
        }
    };
    let rss = |design: &Array2<f64>, y: &Array1<f64>| -> Result<f64> {
        let coef = least_squares(design.view(), y.view())?;
        let resid = &design.dot(&coef) - y;
        Ok(resid.dot(&resid))
    };

    for i in 0..p {
        if degenerate[i] {
            continue;
        }
        let y = target(i);

        // Restricted model: intercept + own lags.
        let mut restricted = Array2::ones((n, 1 + lag));
        fill_lags(&mut restricted, 1, i);
        let rss_restricted = rss(&restricted, &y)?;

        // Diagonal: own lags jointly significant against a constant model.
        let y_mean = y.sum() / n as f64;
        let rss_const: f64 = y.iter().map(|v| (v - y_mean) * (v - y_mean)).sum();
        if n > lag + 1 {
            let self_sig = f_test_nested(rss_const, rss_restricted, lag, n - lag - 1, alpha)?;
            graph.set_edge(i, i, self_sig);
        }

        for (j, &skip) in degenerate.iter().enumerate() {
            if j == i || skip {
                continue;
            }
            let mut full = Array2::ones((n, 1 + 2 * lag));
            fill_lags(&mut full, 1, i);
            fill_lags(&mut full, 1 + lag, j);
            let rss_full = rss(&full, &y)?;
            let df_resid = n.checked_sub(2 * lag + 1).filter(|&d| d > 0).ok_or_else(|| {
                Error::Size("granger: not enough samples for the full model".into())
            })?;
            // Numerical jitter can leave the full RSS a hair above the
            // restricted one; that is a clean "no improvement".
            let rss_full_clamped = rss_full.min(rss_restricted);
            let significant =
                f_test_nested(rss_restricted, rss_full_clamped, lag, df_resid, alpha)?;
            graph.set_edge(i, j, significant);
        }
    }
    Ok(graph)
}
