//! Classical fixed-step fourth-order Runge-Kutta integration and
//! finite-difference derivative estimation.

use ndarray::{Array1, Array2};

use crate::dynamics::systems::SystemSpec;
use crate::dynamics::trajectory::Trajectory;
use crate::error::{Error, Result};

/// Any per-entry magnitude above this aborts a simulation as divergent.
pub const OVERFLOW_GUARD: f64 = 1e12;

/// One classical RK4 update x + (dt/6)(k1 + 2 k2 + 2 k3 + k4).
///
/// A non-finite stage value is reported as an integration error carrying the
/// stage index (1..4).
pub fn rk4_step<F>(rhs: F, state: &[f64], dt: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    if dt <= 0.0 {
        return Err(Error::Input(format!("rk4_step: dt must be positive, got {dt}")));
    }
    let n = state.len();
    let stage = |k: &[f64], scale: f64| -> Vec<f64> {
        (0..n).map(|i| state[i] + scale * dt * k[i]).collect()
    };
    let check = |k: &Vec<f64>, idx: usize| -> Result<()> {
        if k.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integration {
                step: idx,
                detail: format!("non-finite value in RK4 stage {idx}"),
            });
        }
        Ok(())
    };

    let k1 = rhs(state)?;
    check(&k1, 1)?;
    let k2 = rhs(&stage(&k1, 0.5))?;
    check(&k2, 2)?;
    let k3 = rhs(&stage(&k2, 0.5))?;
    check(&k3, 3)?;
    let k4 = rhs(&stage(&k3, 1.0))?;
    check(&k4, 4)?;

    Ok((0..n)
        .map(|i| state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Simulate `spec` from `ic` for `n_steps` samples (the initial condition is
/// the first sample). Derivatives are exact: the right-hand side evaluated at
/// each stored state.
pub fn simulate(spec: &SystemSpec, ic: &[f64], dt: f64, n_steps: usize) -> Result<Trajectory> {
    if ic.len() != spec.dim {
        return Err(Error::Size(format!(
            "simulate: ic has length {}, {} needs {}",
            ic.len(),
            spec.name,
            spec.dim
        )));
    }
    if ic.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("simulate: non-finite initial condition".into()));
    }
    if dt <= 0.0 {
        return Err(Error::Input(format!("simulate: dt must be positive, got {dt}")));
    }
    if n_steps == 0 {
        return Err(Error::Input("simulate: n_steps must be >= 1".into()));
    }

    let dim = spec.dim;
    let mut states = Array2::zeros((n_steps, dim));
    let mut derivs = Array2::zeros((n_steps, dim));
    let mut current = ic.to_vec();
    let rhs = |s: &[f64]| spec.rhs_eval(s);

    for step in 0..n_steps {
        for (j, &v) in current.iter().enumerate() {
            if v.abs() > OVERFLOW_GUARD {
                return Err(Error::Divergence {
                    step,
                    var: spec.var_names[j].to_string(),
                    guard: OVERFLOW_GUARD,
                });
            }
            states[[step, j]] = v;
        }
        let d = rhs(&current).map_err(|e| Error::Integration {
            step,
            detail: e.to_string(),
        })?;
        for (j, &v) in d.iter().enumerate() {
            derivs[[step, j]] = v;
        }
        if step + 1 < n_steps {
            current = rk4_step(rhs, &current, dt).map_err(|e| match e {
                Error::Integration { step: stage, detail } => Error::Integration {
                    step,
                    detail: format!("stage {stage}: {detail}"),
                },
                other => other,
            })?;
        }
    }

    let times = Array1::from_iter((0..n_steps).map(|i| i as f64 * dt));
    let traj = Trajectory {
        times,
        states,
        derivs,
        var_names: spec.var_names.iter().map(|s| s.to_string()).collect(),
        n_system: dim,
    };
    traj.validate()?;
    Ok(traj)
}

/// Second-order finite differences: central in the interior, one-sided
/// three-point stencils at the two boundary rows.
pub fn finite_difference_derivs(states: &Array2<f64>, dt: f64) -> Result<Array2<f64>> {
    let (m, p) = states.dim();
    if m < 3 {
        return Err(Error::Size(format!(
            "finite_difference_derivs: need at least 3 rows, got {m}"
        )));
    }
    if dt <= 0.0 {
        return Err(Error::Input("finite_difference_derivs: dt must be positive".into()));
    }
    let mut out = Array2::zeros((m, p));
    for j in 0..p {
        out[[0, j]] =
            (-3.0 * states[[0, j]] + 4.0 * states[[1, j]] - states[[2, j]]) / (2.0 * dt);
        for i in 1..m - 1 {
            out[[i, j]] = (states[[i + 1, j]] - states[[i - 1, j]]) / (2.0 * dt);
        }
        out[[m - 1, j]] = (3.0 * states[[m - 1, j]] - 4.0 * states[[m - 2, j]]
            + states[[m - 3, j]])
            / (2.0 * dt);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::systems::by_name;
    use ndarray::Array2;

    #[test]
    fn rk4_matches_hand_expanded_decay() {
        // dx/dt = -x from 1.0 over dt = 0.1: the four stages give 0.9048375,
        // the degree-4 Taylor truncation of exp(-0.1).
        let rhs = |s: &[f64]| Ok(vec![-s[0]]);
        let next = rk4_step(rhs, &[1.0], 0.1).unwrap();
        assert!((next[0] - 0.9048375).abs() < 1e-9);
    }

    #[test]
    fn rk4_zero_rhs_keeps_state() {
        let rhs = |s: &[f64]| Ok(vec![0.0; s.len()]);
        let next = rk4_step(rhs, &[3.5, -2.0], 0.7).unwrap();
        assert_eq!(next, vec![3.5, -2.0]);
    }

    #[test]
    fn rk4_constant_rhs_exact() {
        let rhs = |_: &[f64]| Ok(vec![1.0]);
        let next = rk4_step(rhs, &[0.0], 0.5).unwrap();
        assert!((next[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rk4_non_finite_stage_reports_index() {
        let rhs = |s: &[f64]| Ok(vec![if s[0] > 1.5 { f64::NAN } else { 10.0 }]);
        // k1 finite at x=1, k2 evaluated at 1 + 0.5*dt*10 = 3.5 -> NaN.
        match rk4_step(rhs, &[1.0], 0.5) {
            Err(Error::Integration { step, .. }) => assert_eq!(step, 2),
            other => panic!("expected integration error, got {other:?}"),
        }
    }

    #[test]
    fn lorenz_simulation_stays_on_attractor() {
        let spec = by_name("lorenz").unwrap();
        let traj = simulate(&spec, &[1.0, 1.0, 1.0], 0.002, 1000).unwrap();
        assert_eq!(traj.n_samples(), 1000);
        let max_abs = traj.states.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(max_abs < 60.0, "Lorenz left its bounded region: {max_abs}");
    }

    #[test]
    fn pendulum_equilibrium_is_all_zero() {
        let spec = by_name("pendulum").unwrap();
        let traj = simulate(&spec, &[0.0, 0.0], 0.05, 200).unwrap();
        assert!(traj.states.iter().all(|&v| v == 0.0));
        assert!(traj.derivs.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_step_returns_initial_condition() {
        let spec = by_name("sir").unwrap();
        let ic = [60.0, 1.0, 0.0];
        let traj = simulate(&spec, &ic, 0.1, 1).unwrap();
        assert_eq!(traj.n_samples(), 1);
        for (j, &v) in ic.iter().enumerate() {
            assert_eq!(traj.states[[0, j]], v);
        }
        let d = spec.rhs_eval(&ic).unwrap();
        for (j, &v) in d.iter().enumerate() {
            assert_eq!(traj.derivs[[0, j]], v);
        }
    }

    #[test]
    fn simulate_is_deterministic() {
        let spec = by_name("lorenz").unwrap();
        let a = simulate(&spec, &[2.0, -1.0, 5.0], 0.002, 500).unwrap();
        let b = simulate(&spec, &[2.0, -1.0, 5.0], 0.002, 500).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn divergence_reports_step() {
        // dx/dt = x^2 blows up in finite time from x0 = 1 with dt = 1.
        let spec = by_name("lorenz").unwrap();
        // Use a custom unstable starting point far outside the attractor.
        let res = simulate(&spec, &[1e11, 1e11, 1e11], 1.0, 50);
        assert!(matches!(
            res,
            Err(Error::Divergence { .. }) | Err(Error::Integration { .. })
        ));
    }

    #[test]
    fn finite_difference_exact_on_affine_data() {
        let ramp = Array2::from_shape_vec((4, 1), vec![0.0, 0.1, 0.2, 0.3]).unwrap();
        let d = finite_difference_derivs(&ramp, 0.1).unwrap();
        for i in 0..4 {
            assert!((d[[i, 0]] - 1.0).abs() < 1e-12);
        }
        let flat = Array2::from_elem((5, 1), 2.5);
        let d = finite_difference_derivs(&flat, 0.1).unwrap();
        assert!(d.iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn finite_difference_tracks_cosine() {
        let dt = 0.01;
        let m = 100;
        let states =
            Array2::from_shape_fn((m, 1), |(i, _)| (i as f64 * dt).sin());
        let d = finite_difference_derivs(&states, dt).unwrap();
        let mut max_err = 0.0f64;
        for i in 1..m - 1 {
            let truth = (i as f64 * dt).cos();
            max_err = max_err.max((d[[i, 0]] - truth).abs());
        }
        assert!(max_err <= 1e-3, "interior error {max_err}");
    }

    #[test]
    fn finite_difference_needs_three_rows() {
        let two = Array2::zeros((2, 1));
        assert!(matches!(
            finite_difference_derivs(&two, 0.1),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn rk4_error_shrinks_at_fourth_order() {
        // Pendulum from (1, 0): global error at t = 1 against a dt = 1e-5
        // reference should shrink by roughly 2^4 when dt halves.
        let spec = by_name("pendulum").unwrap();
        let run_to_t1 = |dt: f64| -> Vec<f64> {
            let steps = (1.0 / dt).round() as usize;
            let mut state = vec![1.0, 0.0];
            let rhs = |s: &[f64]| spec.rhs_eval(s);
            for _ in 0..steps {
                state = rk4_step(rhs, &state, dt).unwrap();
            }
            state
        };
        let reference = run_to_t1(1e-5);
        let err = |dt: f64| -> f64 {
            let s = run_to_t1(dt);
            s.iter()
                .zip(reference.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(0.02) / err(0.01);
        assert!(
            (12.0..=20.0).contains(&ratio),
            "convergence ratio {ratio} outside [12, 20]"
        );
    }

    #[test]
    fn stored_derivatives_agree_with_finite_differences() {
        // Central differences should match the exact derivatives to
        // O(dt^2) scaled by an empirical third-derivative bound.
        for name in ["lorenz", "pendulum", "sir"] {
            let spec = by_name(name).unwrap();
            let ic: Vec<f64> = match name {
                "lorenz" => vec![1.0, 1.0, 1.0],
                "pendulum" => vec![1.0, 0.0],
                _ => vec![60.0, 1.0, 0.0],
            };
            let dt = spec.default_dt;
            let traj = simulate(&spec, &ic, dt, 500).unwrap();
            let fd = finite_difference_derivs(&traj.states, dt).unwrap();

            // Empirical curvature bound: second differences of the exact
            // derivatives approximate the third state derivative.
            let m = traj.n_samples();
            let mut curvature = 0.0f64;
            for j in 0..traj.n_vars() {
                for i in 1..m - 1 {
                    let d3 = (traj.derivs[[i + 1, j]] - 2.0 * traj.derivs[[i, j]]
                        + traj.derivs[[i - 1, j]])
                        / (dt * dt);
                    curvature = curvature.max(d3.abs());
                }
            }
            let bound = 10.0 * dt * dt * curvature;
            let max_err = (&fd - &traj.derivs)
                .iter()
                .fold(0.0f64, |a, v| a.max(v.abs()));
            assert!(
                max_err <= bound,
                "{name}: finite-difference gap {max_err} above bound {bound}"
            );
        }
    }
}
