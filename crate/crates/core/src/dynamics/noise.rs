//! Noise augmentation: append standard-normal channels to a trajectory,
//! doubling the variable count.

use ndarray::{Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dynamics::integrate::finite_difference_derivs;
use crate::dynamics::trajectory::{Trajectory, NOISE_NAME_PREFIX};
use crate::error::{Error, Result};

/// Append `n_system` i.i.d. standard-normal channels to `traj`. The noise
/// derivative rows come from finite differences since no generating equation
/// exists for them. Deterministic for a fixed seed.
pub fn augment_with_noise(traj: &Trajectory, seed: u64) -> Result<Trajectory> {
    if traj.n_vars() != traj.n_system {
        return Err(Error::Input(
            "augment_with_noise: trajectory already carries noise channels".into(),
        ));
    }
    let m = traj.n_samples();
    let n = traj.n_system;
    if m < 3 {
        return Err(Error::Size(
            "augment_with_noise: need at least 3 samples for noise derivatives".into(),
        ));
    }
    let dt = traj.dt()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise = Array2::zeros((m, n));
    // Column-major fill keeps each channel a contiguous substream.
    for j in 0..n {
        for i in 0..m {
            noise[[i, j]] = StandardNormal.sample(&mut rng);
        }
    }
    let noise_derivs = finite_difference_derivs(&noise, dt)?;

    let states = ndarray::concatenate(Axis(1), &[traj.states.view(), noise.view()])
        .expect("row counts match");
    let derivs = ndarray::concatenate(Axis(1), &[traj.derivs.view(), noise_derivs.view()])
        .expect("row counts match");

    let mut var_names = traj.var_names.clone();
    for idx in 1..=n {
        var_names.push(format!("{NOISE_NAME_PREFIX}{idx}"));
    }

    let out = Trajectory {
        times: traj.times.clone(),
        states,
        derivs,
        var_names,
        n_system: n,
    };
    out.validate()?;
    Ok(out)
}
