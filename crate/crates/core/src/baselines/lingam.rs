//! ICA-based linear non-Gaussian acyclic model discovery on the
//! contemporaneous state matrix.

use ndarray::Array2;

use crate::baselines::BaselineParams;
use crate::causal::CausalGraph;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::numkernel::fastica;

/// Exhaustive-search bound: permutation searches cover p! orderings.
const MAX_VARS: usize = 8;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    heap_permute(&mut current, n, &mut out);
    out
}

fn heap_permute(arr: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == 1 {
        out.push(arr.clone());
        return;
    }
    for i in 0..k {
        heap_permute(arr, k - 1, out);
        if k.is_multiple_of(2) {
            arr.swap(i, k - 1);
        } else {
            arr.swap(0, k - 1);
        }
    }
}

/// ICA-LiNGAM: estimate the unmixing matrix, permute its rows to maximize
/// the diagonal, normalize, read off B = I - W', find the causal order that
/// minimizes the squared upper triangle, zero that triangle, and prune
/// small entries. Edge (i, j) is set when B[i][j] survives; the model is
/// acyclic, so the diagonal stays 0.
///
/// An ICA failure is reported as an empty graph (scored as-is) with a
/// warning, not an error.
pub fn lingam(traj: &Trajectory, params: &BaselineParams) -> Result<CausalGraph> {
    params.validate()?;
    traj.validate()?;
    let p = traj.n_vars();
    let m = traj.n_samples();
    if p == 1 {
        return Ok(CausalGraph::empty(traj.var_names.clone()));
    }
    if p > MAX_VARS {
        return Err(Error::Input(format!(
            "lingam: exhaustive permutation search limited to p <= {MAX_VARS}, got {p}"
        )));
    }
    if m < 200 {
        return Err(Error::Size(format!("lingam: need m >= 200, got {m}")));
    }

    let ica = match fastica(&traj.states, params.seed) {
        Ok(ica) => ica,
        Err(e) => {
            log::warn!("lingam: ICA failed ({e}); returning an empty graph");
            return Ok(CausalGraph::empty(traj.var_names.clone()));
        }
    };
    let w = ica.unmixing;

    // Row permutation minimizing sum(1 / |diag|): puts the large entries on
    // the diagonal so each row can be read as one structural equation.
    let perms = permutations(p);
    let mut best_perm = &perms[0];
    let mut best_cost = f64::INFINITY;
    for perm in &perms {
        let mut cost = 0.0;
        for (i, &row) in perm.iter().enumerate() {
            let d = w[[row, i]].abs();
            if d <= 1e-300 {
                cost = f64::INFINITY;
                break;
            }
            cost += 1.0 / d;
        }
        if cost < best_cost {
            best_cost = cost;
            best_perm = perm;
        }
    }
    if !best_cost.is_finite() {
        log::warn!("lingam: unmixing matrix has a vanishing diagonal; empty graph");
        return Ok(CausalGraph::empty(traj.var_names.clone()));
    }

    // Normalize the permuted rows to unit diagonal and form B = I - W'.
    let mut b = Array2::zeros((p, p));
    for i in 0..p {
        let row = best_perm[i];
        let d = w[[row, i]];
        for j in 0..p {
            let w_norm = w[[row, j]] / d;
            b[[i, j]] = if i == j { 0.0 } else { -w_norm };
        }
    }

    // Causal order minimizing the squared upper triangle of the reordered B.
    let mut best_order = &perms[0];
    let mut best_upper = f64::INFINITY;
    for perm in &perms {
        let mut upper = 0.0;
        for i in 0..p {
            for j in (i + 1)..p {
                let v = b[[perm[i], perm[j]]];
                upper += v * v;
            }
        }
        if upper < best_upper {
            best_upper = upper;
            best_order = perm;
        }
    }

    // Enforce acyclicity along the chosen order, then prune.
    let mut graph = CausalGraph::empty(traj.var_names.clone());
    for i in 0..p {
        for j in (i + 1)..p {
            // best_order[i] precedes best_order[j]: only j -> i direction
            // survives in B; the (i, j) upper entry is noise.
            let effect = best_order[j];
            let cause = best_order[i];
            if b[[effect, cause]].abs() >= params.lingam_prune_threshold {
                graph.set_edge(effect, cause, true);
            }
        }
    }
    Ok(graph)
}
