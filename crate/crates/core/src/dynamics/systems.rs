//! Catalog of the six benchmark systems: right-hand sides, ground-truth
//! causal graphs, and default simulation parameters.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::causal::CausalGraph;
use crate::error::{Error, Result};
use crate::sindy::FeatureSpec;

type RhsFn = fn(&[f64], &mut [f64]) -> Result<()>;

/// A catalog entry: dimension, governing function, ground-truth adjacency,
/// and default simulation parameters.
#[derive(Clone)]
pub struct SystemSpec {
    pub name: &'static str,
    pub dim: usize,
    rhs: RhsFn,
    pub var_names: Vec<&'static str>,
    /// (effect, cause) pairs: cause appears in the effect's equation.
    ground_truth_edges: Vec<(usize, usize)>,
    pub default_dt: f64,
    /// Per-variable sampling interval for initial conditions.
    pub default_ic_box: Vec<(f64, f64)>,
    /// Library features this system needs beyond the default library.
    /// Kept as catalog metadata; the experiment harness does not add them.
    pub extra_library_terms: Vec<FeatureSpec>,
}

impl std::fmt::Debug for SystemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SystemSpec")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("default_dt", &self.default_dt)
            .finish()
    }
}

impl SystemSpec {
    /// Evaluate the governing function at `state`, checking domain and
    /// finiteness. Deterministic.
    pub fn rhs_eval(&self, state: &[f64]) -> Result<Vec<f64>> {
        if state.len() != self.dim {
            return Err(Error::Size(format!(
                "{}: state has length {}, expected {}",
                self.name,
                state.len(),
                self.dim
            )));
        }
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input(format!("{}: non-finite state", self.name)));
        }
        let mut out = vec![0.0; self.dim];
        (self.rhs)(state, &mut out)?;
        for (j, v) in out.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Domain(format!(
                    "{}: non-finite derivative for {}",
                    self.name, self.var_names[j]
                )));
            }
        }
        Ok(out)
    }

    /// Sample an initial condition uniformly from the per-variable box.
    pub fn sample_ic(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        loop {
            let ic: Vec<f64> = self
                .default_ic_box
                .iter()
                .map(|&(lo, hi)| if lo < hi { rng.random_range(lo..hi) } else { lo })
                .collect();
            // The Lorenz box excludes the origin (an unstable fixed point).
            if self.name == "lorenz" && ic.iter().all(|v| v.abs() < 1e-3) {
                continue;
            }
            return ic;
        }
    }
}

/// Ground-truth causal graph for a system. Augmented graphs double the side:
/// the original adjacency fills the top-left block and noise variables
/// neither cause nor are caused by anything.
pub fn ground_truth_graph(spec: &SystemSpec, augmented: bool) -> CausalGraph {
    let n = spec.dim;
    let side = if augmented { 2 * n } else { n };
    let mut adj = Array2::zeros((side, side));
    for &(i, j) in &spec.ground_truth_edges {
        adj[[i, j]] = 1;
    }
    let mut names: Vec<String> = spec.var_names.iter().map(|s| s.to_string()).collect();
    if augmented {
        for idx in 1..=n {
            names.push(format!("{}{}", crate::dynamics::trajectory::NOISE_NAME_PREFIX, idx));
        }
    }
    CausalGraph::new(adj, names).expect("catalog adjacency is well-formed")
}

fn lorenz_rhs(s: &[f64], d: &mut [f64]) -> Result<()> {
    let (x, y, z) = (s[0], s[1], s[2]);
    d[0] = 10.0 * (y - x);
    d[1] = x * (28.0 - z);
    d[2] = x * y - (8.0 / 3.0) * z;
    Ok(())
}

fn mrw_rhs(s: &[f64], d: &mut [f64]) -> Result<()> {
    let (k, h) = (s[0], s[1]);
    let kh = k * h;
    if kh < 0.0 {
        return Err(Error::Domain(format!(
            "mrw: (k*h)^(1/3) undefined for negative product k*h = {kh}"
        )));
    }
    let root = kh.powf(1.0 / 3.0);
    d[0] = 0.01 * root - 0.06 * k;
    d[1] = 0.01 * root - 0.06 * h;
    Ok(())
}

fn fitzhugh_nagumo_rhs(s: &[f64], d: &mut [f64]) -> Result<()> {
    let (v, w) = (s[0], s[1]);
    d[0] = v * (0.1 - v) * (v - 1.0) - w + 5.0;
    d[1] = 0.01 * v - 0.02 * w;
    Ok(())
}

fn lotka_volterra_rhs(s: &[f64], d: &mut [f64]) -> Result<()> {
    let (n1, n2, n3, n4) = (s[0], s[1], s[2], s[3]);
    d[0] = n1 * (1.0 - n1 - 1.09 * n2 - 1.52 * n3);
    d[1] = 0.72 * n2 * (1.0 - n2 - 0.44 * n3 - 1.36 * n4);
    d[2] = 1.53 * n3 * (1.0 - 2.33 * n1 - n3 - 0.47 * n4);
    d[3] = 1.27 * n4 * (1.0 - 1.21 * n1 - 0.52 * n2 - 1.53 * n3 - n4);
    Ok(())
}

fn pendulum_rhs(s: &[f64], d: &mut [f64]) -> Result<()> {
    d[0] = s[1];
    d[1] = -0.76 * s[0].sin();
    Ok(())
}

fn sir_rhs(s: &[f64], d: &mut [f64]) -> Result<()> {
    let (sus, inf, _rec) = (s[0], s[1], s[2]);
    let rate = 0.715 / 60.0;
    d[0] = -rate * inf * sus;
    d[1] = rate * inf * sus - 0.285 * inf;
    d[2] = 0.285 * inf;
    Ok(())
}

/// All six benchmark systems in canonical order.
pub fn catalog() -> Vec<SystemSpec> {
    vec![
        SystemSpec {
            name: "lorenz",
            dim: 3,
            rhs: lorenz_rhs,
            var_names: vec!["x", "y", "z"],
            ground_truth_edges: vec![(0, 0), (0, 1), (1, 0), (1, 2), (2, 0), (2, 1), (2, 2)],
            default_dt: 0.002,
            default_ic_box: vec![(-10.0, 10.0), (-10.0, 10.0), (-10.0, 10.0)],
            extra_library_terms: Vec::new(),
        },
        SystemSpec {
            name: "mrw",
            dim: 2,
            rhs: mrw_rhs,
            var_names: vec!["k", "h"],
            ground_truth_edges: vec![(0, 0), (0, 1), (1, 0), (1, 1)],
            default_dt: 0.5,
            default_ic_box: vec![(0.5, 5.0), (0.5, 5.0)],
            extra_library_terms: vec![FeatureSpec::power(
                vec![0, 1],
                1.0 / 3.0,
                "(x0*x1)^(1/3)",
            )],
        },
        SystemSpec {
            name: "fitzhugh_nagumo",
            dim: 2,
            rhs: fitzhugh_nagumo_rhs,
            var_names: vec!["v", "w"],
            ground_truth_edges: vec![(0, 0), (0, 1), (1, 0), (1, 1)],
            default_dt: 0.1,
            default_ic_box: vec![(-1.0, 1.0), (-1.0, 1.0)],
            extra_library_terms: Vec::new(),
        },
        SystemSpec {
            name: "lotka_volterra",
            dim: 4,
            rhs: lotka_volterra_rhs,
            var_names: vec!["n1", "n2", "n3", "n4"],
            ground_truth_edges: vec![
                (0, 0),
                (0, 1),
                (0, 2),
                (1, 1),
                (1, 2),
                (1, 3),
                (2, 0),
                (2, 2),
                (2, 3),
                (3, 0),
                (3, 1),
                (3, 2),
                (3, 3),
            ],
            default_dt: 0.05,
            default_ic_box: vec![(0.1, 0.9), (0.1, 0.9), (0.1, 0.9), (0.1, 0.9)],
            extra_library_terms: Vec::new(),
        },
        SystemSpec {
            name: "pendulum",
            dim: 2,
            rhs: pendulum_rhs,
            var_names: vec!["u", "v"],
            ground_truth_edges: vec![(0, 1), (1, 0)],
            default_dt: 0.05,
            default_ic_box: vec![(-2.0, 2.0), (-1.0, 1.0)],
            extra_library_terms: Vec::new(),
        },
        SystemSpec {
            name: "sir",
            dim: 3,
            rhs: sir_rhs,
            var_names: vec!["s", "i", "r"],
            ground_truth_edges: vec![(0, 0), (0, 1), (1, 0), (1, 1), (2, 1)],
            default_dt: 0.1,
            default_ic_box: vec![(40.0, 80.0), (0.5, 5.0), (0.0, 0.0)],
            extra_library_terms: Vec::new(),
        },
    ]
}

/// Look up one system by its catalog name.
pub fn by_name(name: &str) -> Result<SystemSpec> {
    catalog()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| {
            let known: Vec<&str> = catalog().iter().map(|s| s.name).collect();
            Error::Usage(format!("unknown system {name:?}; known: {}", known.join(", ")))
        })
}
