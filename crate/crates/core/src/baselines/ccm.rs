//! Convergent cross mapping on delay-embedded state reconstructions.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use crate::baselines::BaselineParams;
use crate::causal::CausalGraph;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::numkernel::delay_embedding;

/// Cross-map skill of predicting `target` from the manifold of the embedded
/// series, using the first `lib_size` embedded points as the library.
///
/// Estimates use exponentially distance-weighted averages over the E+1
/// nearest library neighbors; skill is the Pearson correlation between the
/// estimates and the truth over all embedded times.
fn cross_map_skill(
    embedding: &ArrayView2<f64>,
    target: &[f64],
    lib_size: usize,
    e: usize,
) -> f64 {
    let n = embedding.nrows();
    let k = e + 1;
    if lib_size <= k {
        return 0.0;
    }
    let mut estimates = Vec::with_capacity(n);
    let mut truths = Vec::with_capacity(n);
    let mut heap: Vec<(f64, usize)> = Vec::with_capacity(lib_size);

    for q in 0..n {
        heap.clear();
        let query = embedding.row(q);
        for cand in 0..lib_size {
            if cand == q {
                continue;
            }
            let mut d = 0.0;
            for c in 0..e {
                let diff = embedding[[cand, c]] - query[c];
                d += diff * diff;
            }
            heap.push((d, cand));
        }
        if heap.len() < k {
            continue;
        }
        heap.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let nearest = &heap[..k];
        let d1 = nearest[0].0.sqrt();
        let mut num = 0.0;
        let mut den = 0.0;
        if d1 <= 0.0 {
            // Exact rediscovery of the query point: average the ties.
            for &(d, idx) in nearest {
                if d <= 0.0 {
                    num += target[idx];
                    den += 1.0;
                }
            }
        } else {
            for &(d, idx) in nearest {
                let w = (-d.sqrt() / d1).exp();
                num += w * target[idx];
                den += w;
            }
        }
        estimates.push(num / den);
        truths.push(target[q]);
    }
    pearson(&estimates, &truths).unwrap_or(0.0)
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len();
    if n < 2 {
        return None;
    }
    let ma = a.iter().sum::<f64>() / n as f64;
    let mb = b.iter().sum::<f64>() / n as f64;
    let mut num = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for i in 0..n {
        let da = a[i] - ma;
        let db = b[i] - mb;
        num += da * db;
        va += da * da;
        vb += db * db;
    }
    if va <= 0.0 || vb <= 0.0 {
        return None;
    }
    Some((num / (va * vb).sqrt()).clamp(-1.0, 1.0))
}

/// Edge (i, j) is set when the skill of cross-mapping variable j from the
/// reconstruction built on variable i converges upward with library size,
/// i.e. j leaves a readable imprint on i's dynamics. The diagonal is fixed
/// to 1: every variable maps onto itself trivially.
pub fn ccm(traj: &Trajectory, params: &BaselineParams) -> Result<CausalGraph> {
    params.validate()?;
    traj.validate()?;
    let e = params.ccm_e;
    let tau = params.ccm_tau;
    let m = traj.n_samples();
    let p = traj.n_vars();
    let max_lib = *params.ccm_lib_sizes.last().expect("validated non-empty");
    let min_lib = params.ccm_lib_sizes[0];
    if m < max_lib + (e - 1) * tau {
        return Err(Error::Size(format!(
            "ccm: need m >= max lib size + (E-1) tau = {}",
            max_lib + (e - 1) * tau
        )));
    }

    let offset = (e - 1) * tau;
    let embeddings: Vec<Array2<f64>> = (0..p)
        .map(|i| delay_embedding(traj.states.column(i), e, tau))
        .collect::<Result<_>>()?;
    // Targets aligned with embedded rows: x_j at original time r + offset.
    let targets: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            (offset..m)
                .map(|t| traj.states[[t, j]])
                .collect::<Vec<f64>>()
        })
        .collect();

    let pairs: Vec<(usize, usize)> = (0..p)
        .flat_map(|i| (0..p).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let decisions: Vec<((usize, usize), bool)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let emb = embeddings[i].view();
            let rho_min = cross_map_skill(&emb, &targets[j], min_lib, e);
            let rho_max = cross_map_skill(&emb, &targets[j], max_lib, e);
            let edge = rho_max - rho_min > params.ccm_rho_gain && rho_max > 0.0;
            ((i, j), edge)
        })
        .collect();

    let mut graph = CausalGraph::empty(traj.var_names.clone());
    for i in 0..p {
        graph.set_edge(i, i, true);
    }
    for ((i, j), edge) in decisions {
        graph.set_edge(i, j, edge);
    }
    Ok(graph)
}
