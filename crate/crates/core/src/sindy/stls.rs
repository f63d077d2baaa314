//! Sequential thresholded least squares and the trajectory-level fit
//! operations built on it.
//!
//! Library columns are scaled to unit l2 norm before each regression so the
//! solves stay well conditioned across features of very different
//! magnitudes; coefficients are rescaled back before thresholding, so the
//! threshold acts on the natural coefficient units that the governing
//! equations are written in.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;

use crate::causal::CausalGraph;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::numkernel::least_squares;
use crate::sindy::library::{evaluate_library, CandidateLibrary};

/// Default iteration cap used by the fit operations.
pub const DEFAULT_MAX_ITER: usize = 20;

/// Per-(feature, equation) permission matrix for constrained fits.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintMask {
    allowed: Array2<bool>,
}

impl ConstraintMask {
    pub fn new(allowed: Array2<bool>) -> Self {
        ConstraintMask { allowed }
    }

    pub fn all_true(num_features: usize, p: usize) -> Self {
        ConstraintMask {
            allowed: Array2::from_elem((num_features, p), true),
        }
    }

    pub fn allowed(&self) -> &Array2<bool> {
        &self.allowed
    }

    pub fn shape(&self) -> (usize, usize) {
        self.allowed.dim()
    }
}

/// Outcome of one STLS solve.
#[derive(Debug, Clone)]
pub struct StlsResult {
    pub coefficients: Array1<f64>,
    /// False when the support was still changing at the iteration cap.
    pub converged: bool,
    pub iterations: usize,
    /// Active-feature count entering each least-squares pass.
    pub support_sizes: Vec<usize>,
}

/// The learned sparse coefficient matrix (features x equations).
#[derive(Debug, Clone)]
pub struct CoefficientMatrix {
    pub xi: Array2<f64>,
    pub library: CandidateLibrary,
    pub var_names: Vec<String>,
    pub threshold_used: f64,
    pub max_iter: usize,
    /// Per-equation convergence of the thresholding loop.
    pub column_converged: Vec<bool>,
}

impl CoefficientMatrix {
    /// CSV with feature-id rows and one column per equation, full precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature");
        for name in &self.var_names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (f, feature) in self.library.features().iter().enumerate() {
            out.push_str(feature.id());
            for k in 0..self.var_names.len() {
                out.push(',');
                out.push_str(&crate::dynamics::trajectory::fmt_f64(self.xi[[f, k]]));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Sequential thresholded least squares for a single target column.
///
/// Alternates a support-restricted least-squares solve with hard
/// thresholding of coefficients below `threshold` until the support is
/// stable. An empty support yields the zero vector. Hitting `max_iter`
/// returns the current coefficients flagged as unconverged.
pub fn stls(
    theta: ArrayView2<f64>,
    xdot_col: ArrayView1<f64>,
    threshold: f64,
    max_iter: usize,
) -> Result<StlsResult> {
    if threshold <= 0.0 {
        return Err(Error::Input(format!(
            "stls: threshold must be positive, got {threshold}"
        )));
    }
    if max_iter == 0 {
        return Err(Error::Input("stls: max_iter must be >= 1".into()));
    }
    let (m, num_features) = theta.dim();
    if xdot_col.len() != m {
        return Err(Error::Size(format!(
            "stls: theta has {m} rows but target has {}",
            xdot_col.len()
        )));
    }

    // Unit-norm column scaling; zero-norm columns can never enter the support.
    let norms: Vec<f64> = (0..num_features)
        .map(|f| theta.column(f).dot(&theta.column(f)).sqrt())
        .collect();
    let mut active: Vec<usize> = (0..num_features).filter(|&f| norms[f] > 0.0).collect();

    let mut coefficients = Array1::zeros(num_features);
    let mut support_sizes = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        iterations += 1;
        support_sizes.push(active.len());
        if active.is_empty() {
            converged = true;
            break;
        }

        let mut sub = Array2::zeros((m, active.len()));
        for (c, &f) in active.iter().enumerate() {
            let inv = 1.0 / norms[f];
            for r in 0..m {
                sub[[r, c]] = theta[[r, f]] * inv;
            }
        }
        let scaled = least_squares(sub.view(), xdot_col)?;

        coefficients.fill(0.0);
        let mut next_active = Vec::with_capacity(active.len());
        for (c, &f) in active.iter().enumerate() {
            let natural = scaled[c] / norms[f];
            if natural.abs() >= threshold {
                coefficients[f] = natural;
                next_active.push(f);
            }
        }

        if next_active == active {
            converged = true;
            break;
        }
        active = next_active;
    }

    if !converged {
        log::warn!("stls: support still changing after {max_iter} iterations");
    }
    Ok(StlsResult {
        coefficients,
        converged,
        iterations,
        support_sizes,
    })
}

fn fit_with_mask(
    traj: &Trajectory,
    lib: &CandidateLibrary,
    threshold: f64,
    max_iter: usize,
    mask: Option<&ConstraintMask>,
) -> Result<CoefficientMatrix> {
    traj.validate()?;
    let p = traj.n_vars();
    if lib.p() != p {
        return Err(Error::Size(format!(
            "fit: library expects p = {} but trajectory has {p} variables",
            lib.p()
        )));
    }
    if let Some(mask) = mask {
        if mask.shape() != (lib.len(), p) {
            return Err(Error::Size(format!(
                "fit_constrained: mask shape {:?} does not match ({}, {p})",
                mask.shape(),
                lib.len()
            )));
        }
    }
    let theta = evaluate_library(lib, traj.states.view())?;

    let columns: Vec<(Array1<f64>, bool)> = (0..p)
        .into_par_iter()
        .map(|k| -> Result<(Array1<f64>, bool)> {
            let target = traj.derivs.column(k);
            let allowed: Vec<usize> = match mask {
                None => (0..lib.len()).collect(),
                Some(m) => (0..lib.len()).filter(|&f| m.allowed()[[f, k]]).collect(),
            };
            if allowed.is_empty() {
                log::warn!("fit: every feature masked out for equation {k}; returning zeros");
                return Ok((Array1::zeros(lib.len()), true));
            }
            let wrap = |e: Error| Error::Input(format!("equation column {k}: {e}"));
            let result = if allowed.len() == lib.len() {
                stls(theta.view(), target, threshold, max_iter).map_err(wrap)?
            } else {
                let sub = theta.select(Axis(1), &allowed);
                let r = stls(sub.view(), target, threshold, max_iter).map_err(wrap)?;
                let mut full = Array1::zeros(lib.len());
                for (c, &f) in allowed.iter().enumerate() {
                    full[f] = r.coefficients[c];
                }
                StlsResult {
                    coefficients: full,
                    ..r
                }
            };
            Ok((result.coefficients, result.converged))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut xi = Array2::zeros((lib.len(), p));
    let mut column_converged = Vec::with_capacity(p);
    for (k, (coefs, conv)) in columns.into_iter().enumerate() {
        for f in 0..lib.len() {
            xi[[f, k]] = coefs[f];
        }
        column_converged.push(conv);
    }

    Ok(CoefficientMatrix {
        xi,
        library: lib.clone(),
        var_names: traj.var_names.clone(),
        threshold_used: threshold,
        max_iter,
        column_converged,
    })
}

/// Fit one sparse model per derivative column.
pub fn fit(traj: &Trajectory, lib: &CandidateLibrary, threshold: f64) -> Result<CoefficientMatrix> {
    fit_with_mask(traj, lib, threshold, DEFAULT_MAX_ITER, None)
}

/// Like [`fit`], but features disallowed by the mask are excluded from each
/// equation's regression from the start and stay exactly zero.
pub fn fit_constrained(
    traj: &Trajectory,
    lib: &CandidateLibrary,
    threshold: f64,
    mask: &ConstraintMask,
) -> Result<CoefficientMatrix> {
    fit_with_mask(traj, lib, threshold, DEFAULT_MAX_ITER, Some(mask))
}

/// Read the causal graph off the learned coefficients: j causes i whenever
/// some feature with a nonzero coefficient in equation i depends on j.
pub fn coefficients_to_graph(coefs: &CoefficientMatrix) -> CausalGraph {
    let p = coefs.var_names.len();
    let mut graph = CausalGraph::empty(coefs.var_names.clone());
    for i in 0..p {
        for (f, feature) in coefs.library.features().iter().enumerate() {
            if coefs.xi[[f, i]] != 0.0 {
                for &j in feature.depends_on() {
                    graph.set_edge(i, j, true);
                }
            }
        }
    }
    graph
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{augment_with_noise, by_name, ground_truth_graph, simulate};
    use crate::sindy::library::default_library;
    use ndarray::array;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn quadratic_theta_on_line() -> (Array2<f64>, Array1<f64>) {
        // Features {1, x, x^2} on x = 1, 2, 3, 4.
        let xs = [1.0, 2.0, 3.0, 4.0];
        let mut theta = Array2::zeros((4, 3));
        for (i, &x) in xs.iter().enumerate() {
            theta[[i, 0]] = 1.0;
            theta[[i, 1]] = x;
            theta[[i, 2]] = x * x;
        }
        let target = Array1::from_iter(xs.iter().map(|&x| 2.0 * x));
        (theta, target)
    }

    #[test]
    fn recovers_exact_sparse_model() {
        let (theta, target) = quadratic_theta_on_line();
        let r = stls(theta.view(), target.view(), 0.5, 20).unwrap();
        assert!(r.converged);
        assert!(r.coefficients[0].abs() < 1e-10);
        assert!((r.coefficients[1] - 2.0).abs() < 1e-10);
        assert!(r.coefficients[2].abs() < 1e-10);
    }

    #[test]
    fn oversized_threshold_zeroes_everything() {
        let (theta, target) = quadratic_theta_on_line();
        let r = stls(theta.view(), target.view(), 1e6, 20).unwrap();
        assert!(r.converged);
        assert!(r.coefficients.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn constant_target_keeps_only_constant() {
        let (theta, _) = quadratic_theta_on_line();
        let target = Array1::from_elem(4, 3.0);
        let r = stls(theta.view(), target.view(), 1.0, 20).unwrap();
        assert!((r.coefficients[0] - 3.0).abs() < 1e-10);
        assert!(r.coefficients[1].abs() < 1e-12);
        assert!(r.coefficients[2].abs() < 1e-12);
    }

    #[test]
    fn support_never_grows() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..25 {
            let m = 40;
            let k = 8;
            let theta = Array2::from_shape_fn((m, k), |_| rng.random_range(-1.0..1.0));
            let target = Array1::from_shape_fn(m, |_| rng.random_range(-1.0..1.0));
            let r = stls(theta.view(), target.view(), 0.2, 20).unwrap();
            for w in r.support_sizes.windows(2) {
                assert!(w[1] <= w[0], "support grew: {:?}", r.support_sizes);
            }
        }
    }

    #[test]
    fn fixed_point_property_on_seeded_instances() {
        // Re-running one least-squares pass on the returned support must not
        // move any coefficient; all nonzeros sit at or above the threshold.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let threshold = 0.1;
        for _ in 0..50 {
            let m = 60;
            let k = 10;
            let theta = Array2::from_shape_fn((m, k), |_| rng.random_range(-1.0..1.0));
            let true_coefs = Array1::from_shape_fn(k, |f| {
                if f % 3 == 0 {
                    rng.random_range(0.5..2.0)
                } else {
                    0.0
                }
            });
            let noise = Array1::from_shape_fn(m, |_| rng.random_range(-0.01..0.01));
            let target = &theta.dot(&true_coefs) + &noise;
            let r = stls(theta.view(), target.view(), threshold, 20).unwrap();
            assert!(r.converged);

            let support: Vec<usize> =
                (0..k).filter(|&f| r.coefficients[f] != 0.0).collect();
            for &f in &support {
                assert!(r.coefficients[f].abs() >= threshold);
            }
            if support.is_empty() {
                continue;
            }
            let sub = theta.select(Axis(1), &support);
            let refit = least_squares(sub.view(), target.view()).unwrap();
            for (c, &f) in support.iter().enumerate() {
                assert!(
                    (refit[c] - r.coefficients[f]).abs() <= 1e-10,
                    "support coefficient moved on refit"
                );
            }
        }
    }

    #[test]
    fn small_instance_support_recovery() {
        // Noiseless targets over well-conditioned libraries recover the
        // generating support whenever every coefficient clears 2x threshold.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let threshold = 0.1;
        let mut checked = 0;
        while checked < 50 {
            let m = 50;
            let k = rng.random_range(3..=6usize);
            let theta = Array2::from_shape_fn((m, k), |_| rng.random_range(-1.0..1.0));
            // Condition check on the normalized Gram matrix.
            let mut norm = theta.clone();
            for mut col in norm.columns_mut() {
                let n = col.iter().map(|v| v * v).sum::<f64>().sqrt();
                col.mapv_inplace(|v| v / n);
            }
            let gram = norm.t().dot(&norm);
            let (vals, _) = crate::numkernel::sym_eig(&gram);
            let max = vals.iter().cloned().fold(f64::MIN, f64::max);
            let min = vals.iter().cloned().fold(f64::MAX, f64::min);
            if min <= 0.0 || max / min >= 100.0 {
                continue;
            }
            let mut true_coefs = Array1::zeros(k);
            let support_size = rng.random_range(1..=2usize);
            let mut support = Vec::new();
            while support.len() < support_size {
                let f = rng.random_range(0..k);
                if !support.contains(&f) {
                    support.push(f);
                }
            }
            for &f in &support {
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                true_coefs[f] = sign * rng.random_range((2.0 * threshold)..3.0);
            }
            let target = theta.dot(&true_coefs);
            let r = stls(theta.view(), target.view(), threshold, 20).unwrap();
            let got: Vec<usize> = (0..k).filter(|&f| r.coefficients[f] != 0.0).collect();
            let mut want = support.clone();
            want.sort_unstable();
            assert_eq!(got, want, "support mismatch on instance {checked}");
            checked += 1;
        }
    }

    #[test]
    fn lorenz_fit_recovers_governing_coefficients() {
        let spec = by_name("lorenz").unwrap();
        let traj = simulate(&spec, &[1.0, 1.0, 1.0], 0.002, 1000).unwrap();
        let lib = default_library(3, 2, false, Vec::new()).unwrap();
        let coefs = fit(&traj, &lib, 0.1).unwrap();

        let idx = |id: &str| lib.index_of(id).unwrap();
        let tol = 1e-3;
        // dx/dt = -10 x + 10 y
        assert!((coefs.xi[[idx("x0"), 0]] + 10.0).abs() < tol);
        assert!((coefs.xi[[idx("x1"), 0]] - 10.0).abs() < tol);
        // dy/dt = 28 x - x z
        assert!((coefs.xi[[idx("x0"), 1]] - 28.0).abs() < tol);
        assert!((coefs.xi[[idx("x0*x2"), 1]] + 1.0).abs() < tol);
        // dz/dt = x y - (8/3) z
        assert!((coefs.xi[[idx("x0*x1"), 2]] - 1.0).abs() < tol);
        assert!((coefs.xi[[idx("x2"), 2]] + 8.0 / 3.0).abs() < tol);

        // Nonzero pattern is exactly the generating support.
        let mut nonzeros: Vec<(usize, usize)> = Vec::new();
        for f in 0..lib.len() {
            for k in 0..3 {
                if coefs.xi[[f, k]] != 0.0 {
                    nonzeros.push((f, k));
                }
            }
        }
        let mut expected = vec![
            (idx("x0"), 0),
            (idx("x1"), 0),
            (idx("x0"), 1),
            (idx("x0*x2"), 1),
            (idx("x0*x1"), 2),
            (idx("x2"), 2),
        ];
        expected.sort_unstable();
        nonzeros.sort_unstable();
        assert_eq!(nonzeros, expected);
    }

    #[test]
    fn zero_trajectory_yields_zero_coefficients() {
        let spec = by_name("pendulum").unwrap();
        let traj = simulate(&spec, &[0.0, 0.0], 0.05, 100).unwrap();
        let lib = default_library(2, 3, false, Vec::new()).unwrap();
        let coefs = fit(&traj, &lib, 0.1).unwrap();
        assert!(coefs.xi.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn pendulum_fit_finds_sine_term() {
        let spec = by_name("pendulum").unwrap();
        let traj = simulate(&spec, &[1.5, 0.3], 0.05, 1000).unwrap();
        let lib = default_library(2, 3, true, Vec::new()).unwrap();
        let coefs = fit(&traj, &lib, 0.1).unwrap();
        let idx = |id: &str| lib.index_of(id).unwrap();
        assert!((coefs.xi[[idx("x1"), 0]] - 1.0).abs() < 1e-3);
        assert!((coefs.xi[[idx("sin(x0)"), 1]] + 0.76).abs() < 1e-3);
    }

    #[test]
    fn all_true_mask_matches_unconstrained_fit() {
        let spec = by_name("lorenz").unwrap();
        let traj = simulate(&spec, &[2.0, 1.0, 20.0], 0.002, 500).unwrap();
        let lib = default_library(3, 2, false, Vec::new()).unwrap();
        let plain = fit(&traj, &lib, 0.1).unwrap();
        let mask = ConstraintMask::all_true(lib.len(), 3);
        let masked = fit_constrained(&traj, &lib, 0.1, &mask).unwrap();
        assert_eq!(plain.xi, masked.xi);
    }

    #[test]
    fn mask_exclusion_is_structural() {
        let spec = by_name("lorenz").unwrap();
        let traj = simulate(&spec, &[1.0, 1.0, 1.0], 0.002, 500).unwrap();
        let lib = default_library(3, 2, false, Vec::new()).unwrap();
        // Forbid every feature touching z in the first equation.
        let mut allowed = Array2::from_elem((lib.len(), 3), true);
        for (f, feature) in lib.features().iter().enumerate() {
            if feature.depends_on().contains(&2) {
                allowed[[f, 0]] = false;
            }
        }
        let mask = ConstraintMask::new(allowed);
        let coefs = fit_constrained(&traj, &lib, 0.1, &mask).unwrap();
        for (f, feature) in lib.features().iter().enumerate() {
            if feature.depends_on().contains(&2) {
                assert_eq!(coefs.xi[[f, 0]], 0.0);
            }
        }
    }

    #[test]
    fn ground_truth_mask_recovers_clean_coefficients_under_noise() {
        let spec = by_name("lorenz").unwrap();
        let traj = simulate(&spec, &[1.0, 1.0, 1.0], 0.002, 1000).unwrap();
        let clean_lib = default_library(3, 2, false, Vec::new()).unwrap();
        let clean = fit(&traj, &clean_lib, 0.1).unwrap();

        let aug = augment_with_noise(&traj, 11).unwrap();
        let aug_lib = default_library(6, 2, false, Vec::new()).unwrap();
        let truth = ground_truth_graph(&spec, true);
        let mask = crate::causal::graph_to_constraint_mask(&truth, &aug_lib).unwrap();
        let constrained = fit_constrained(&aug, &aug_lib, 0.1, &mask).unwrap();

        // The three system equations must match the clean fit.
        for k in 0..3 {
            for (f, feature) in clean_lib.features().iter().enumerate() {
                let fa = aug_lib.index_of(feature.id()).unwrap();
                assert!(
                    (clean.xi[[f, k]] - constrained.xi[[fa, k]]).abs() < 1e-3,
                    "feature {} equation {k}",
                    feature.id()
                );
            }
        }
    }

    #[test]
    fn graph_extraction_semantics() {
        let lib = default_library(3, 2, false, Vec::new()).unwrap();
        let mut xi = Array2::zeros((lib.len(), 3));
        let coefs = CoefficientMatrix {
            xi: xi.clone(),
            library: lib.clone(),
            var_names: vec!["a".into(), "b".into(), "c".into()],
            threshold_used: 0.1,
            max_iter: 20,
            column_converged: vec![true; 3],
        };
        assert_eq!(coefficients_to_graph(&coefs).edge_count(), 0);

        // Single nonzero on x0*x1 in equation 2 produces edges 0->2 and 1->2.
        xi[[lib.index_of("x0*x1").unwrap(), 2]] = 5.0;
        let coefs = CoefficientMatrix { xi, ..coefs };
        let g = coefficients_to_graph(&coefs);
        assert_eq!(g.edge_count(), 2);
        assert!(g.has_edge(2, 0));
        assert!(g.has_edge(2, 1));
    }

    #[test]
    fn exact_lorenz_fit_reproduces_ground_truth_graph() {
        let spec = by_name("lorenz").unwrap();
        let traj = simulate(&spec, &[1.0, 1.0, 1.0], 0.002, 1000).unwrap();
        let lib = default_library(3, 2, false, Vec::new()).unwrap();
        let coefs = fit(&traj, &lib, 0.1).unwrap();
        let g = coefficients_to_graph(&coefs);
        assert_eq!(g, ground_truth_graph(&spec, false));
    }

    #[test]
    fn graph_is_invariant_under_coefficient_scaling() {
        let spec = by_name("lorenz").unwrap();
        let traj = simulate(&spec, &[1.0, 1.0, 1.0], 0.002, 500).unwrap();
        let lib = default_library(3, 2, false, Vec::new()).unwrap();
        let coefs = fit(&traj, &lib, 0.1).unwrap();
        let g1 = coefficients_to_graph(&coefs);
        let doubled = CoefficientMatrix {
            xi: coefs.xi.mapv(|v| v * 2.0),
            ..coefs
        };
        assert_eq!(g1, coefficients_to_graph(&doubled));
    }

    #[test]
    fn coefficient_csv_has_feature_rows() {
        let lib = default_library(2, 1, false, Vec::new()).unwrap();
        let coefs = CoefficientMatrix {
            xi: array![[0.0, 0.0], [2.0, 0.0], [0.0, -1.5]],
            library: lib,
            var_names: vec!["x".into(), "y".into()],
            threshold_used: 0.1,
            max_iter: 20,
            column_converged: vec![true, true],
        };
        let csv = coefs.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "feature,x,y");
        assert!(lines[1].starts_with("1,"));
        assert!(lines[2].starts_with("x0,"));
        assert!(lines[3].starts_with("x1,"));
    }
}
