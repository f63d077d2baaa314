//! Simulation of the benchmark systems: RK4 integration, exact and
//! finite-difference derivatives, noise augmentation, and ground-truth
//! causal graphs.

pub mod integrate;
pub mod noise;
pub mod systems;
pub mod trajectory;

pub use integrate::{finite_difference_derivs, rk4_step, simulate, OVERFLOW_GUARD};
pub use noise::augment_with_noise;
pub use systems::{by_name, catalog, ground_truth_graph, SystemSpec};
pub use trajectory::Trajectory;
