//! Small dense linear-algebra and statistics kernels shared by the sparse
//! regression solver and the causal-discovery baselines.

pub mod embed;
pub mod ica;
pub mod linalg;
pub mod stats;

pub use embed::{delay_embedding, knn_indices};
pub use ica::{fastica, sym_eig, IcaResult};
pub use linalg::{least_squares, residual_sum_of_squares, Matrix};
pub use stats::{f_test_nested, fisher_z_independent, partial_correlation};
