//! Two-stage lag-based causal discovery: PC-style condition selection
//! followed by momentary conditional-independence tests.

use ndarray::{Array1, Array2};
use rayon::prelude::*;

use crate::baselines::BaselineParams;
use crate::causal::CausalGraph;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::numkernel::{fisher_z_independent, partial_correlation};

/// Cap on the conditioning-set size during condition selection.
const MAX_COND_SIZE: usize = 3;

/// A lagged variable x_j(t - tau).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Lagged {
    var: usize,
    lag: usize,
}

/// Extract the sample column for `lagged` over the window `start..m`.
fn lagged_column(traj: &Trajectory, lagged: Lagged, start: usize) -> Array1<f64> {
    let m = traj.n_samples();
    Array1::from_iter((start..m).map(|t| traj.states[[t - lagged.lag, lagged.var]]))
}

/// Partial-correlation independence test with degeneracy handling:
/// zero-variance residuals count as independent (with a warning).
fn ci_test(
    target: &Array1<f64>,
    cand: &Array1<f64>,
    conds: &[Array1<f64>],
    alpha: f64,
) -> Result<(bool, f64)> {
    let m = target.len();
    let q = conds.len();
    let mut z = Array2::zeros((m, q));
    for (c, col) in conds.iter().enumerate() {
        z.column_mut(c).assign(col);
    }
    match partial_correlation(target.view(), cand.view(), z.view()) {
        Ok(r) => {
            let independent = fisher_z_independent(r, m, q, alpha)?;
            Ok((independent, r))
        }
        Err(Error::UndefinedCorrelation(msg)) => {
            log::warn!("pcmci: degenerate test treated as independent ({msg})");
            Ok((true, 0.0))
        }
        Err(e) => Err(e),
    }
}

/// Stage 1: iteratively shrink the lagged-candidate set of one target by
/// testing each candidate against conditioning sets drawn from the
/// strongest remaining candidates.
fn select_parents(
    traj: &Trajectory,
    target_var: usize,
    params: &BaselineParams,
    start: usize,
) -> Result<Vec<Lagged>> {
    let p = traj.n_vars();
    let max_lag = params.pcmci_max_lag;
    let alpha = params.pcmci_alpha;
    let target = lagged_column(traj, Lagged { var: target_var, lag: 0 }, start);

    // Level 0: unconditional screening.
    let mut survivors: Vec<(Lagged, f64)> = Vec::new();
    for var in 0..p {
        for lag in 1..=max_lag {
            let cand = Lagged { var, lag };
            let col = lagged_column(traj, cand, start);
            let (independent, r) = ci_test(&target, &col, &[], alpha)?;
            if !independent {
                survivors.push((cand, r.abs()));
            }
        }
    }
    survivors.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());

    for level in 1..=MAX_COND_SIZE {
        if survivors.len() <= level {
            break;
        }
        let snapshot = survivors.clone();
        let mut next: Vec<(Lagged, f64)> = Vec::new();
        for &(cand, _) in &snapshot {
            // Condition on the `level` strongest other candidates.
            let conds: Vec<Array1<f64>> = snapshot
                .iter()
                .filter(|(other, _)| *other != cand)
                .take(level)
                .map(|(other, _)| lagged_column(traj, *other, start))
                .collect();
            if conds.len() < level {
                next.push((cand, snapshot.iter().find(|(c, _)| *c == cand).unwrap().1));
                continue;
            }
            let col = lagged_column(traj, cand, start);
            let (independent, r) = ci_test(&target, &col, &conds, alpha)?;
            if !independent {
                next.push((cand, r.abs()));
            }
        }
        next.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        survivors = next;
    }
    Ok(survivors.into_iter().map(|(c, _)| c).collect())
}

/// Momentary conditional-independence graph discovery.
///
/// Stage 1 selects lagged parent candidates per variable; stage 2 retests
/// every lagged link conditioned on the union of both variables' selected
/// parents. Links are aggregated over lags: edge (i, j) is set when any lag
/// of j survives for target i. The diagonal records surviving self-lags.
pub fn pcmci(traj: &Trajectory, params: &BaselineParams) -> Result<CausalGraph> {
    params.validate()?;
    traj.validate()?;
    let p = traj.n_vars();
    let m = traj.n_samples();
    let max_lag = params.pcmci_max_lag;
    let alpha = params.pcmci_alpha;
    if m <= 10 * (max_lag + 1) {
        return Err(Error::Size(format!(
            "pcmci: need m > 10 * (max_lag + 1) (m = {m}, max_lag = {max_lag})"
        )));
    }

    // Stage 1 window admits lags up to max_lag; stage 2 shifts parent lags
    // by the link lag, so its window admits 2 * max_lag.
    let start1 = max_lag;
    let start2 = 2 * max_lag;

    let parents: Vec<Vec<Lagged>> = (0..p)
        .into_par_iter()
        .map(|i| select_parents(traj, i, params, start1))
        .collect::<Result<_>>()?;

    let links: Vec<((usize, usize), bool)> = (0..p)
        .into_par_iter()
        .flat_map_iter(|i| {
            let parents = &parents;
            (0..p).map(move |j| -> Result<((usize, usize), bool)> {
                let target = lagged_column(traj, Lagged { var: i, lag: 0 }, start2);
                let mut any_lag_dependent = false;
                for lag in 1..=max_lag {
                    let link = Lagged { var: j, lag };
                    let col = lagged_column(traj, link, start2);
                    // Conditioning set: strongest parents of the target
                    // (minus the link itself) plus the source's strongest
                    // parents shifted by lag, deduplicated. Each side is
                    // capped at the conditioning-size limit; unbounded sets
                    // of collinear smooth lags drown the momentary signal.
                    let mut cond_vars: Vec<Lagged> = Vec::new();
                    for &par in parents[i].iter().take(MAX_COND_SIZE) {
                        if par != link && !cond_vars.contains(&par) {
                            cond_vars.push(par);
                        }
                    }
                    for &par in parents[j].iter().take(MAX_COND_SIZE) {
                        let shifted = Lagged {
                            var: par.var,
                            lag: par.lag + lag,
                        };
                        if shifted != link && !cond_vars.contains(&shifted) {
                            cond_vars.push(shifted);
                        }
                    }
                    let conds: Vec<Array1<f64>> = cond_vars
                        .iter()
                        .map(|&c| lagged_column(traj, c, start2))
                        .collect();
                    let (independent, _) = ci_test(&target, &col, &conds, alpha)?;
                    if !independent {
                        any_lag_dependent = true;
                        break;
                    }
                }
                Ok(((i, j), any_lag_dependent))
            })
        })
        .collect::<Result<_>>()?;

    let mut graph = CausalGraph::empty(traj.var_names.clone());
    for ((i, j), present) in links {
        graph.set_edge(i, j, present);
    }
    Ok(graph)
}
