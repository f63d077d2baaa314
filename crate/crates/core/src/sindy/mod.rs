//! Sparse identification of governing equations: candidate libraries,
//! sequential thresholded least squares, constrained fits, and extraction
//! of causal graphs from learned coefficients.

pub mod library;
pub mod stls;

pub use library::{default_library, evaluate_library, CandidateLibrary, FeatureKind, FeatureSpec};
pub use stls::{
    coefficients_to_graph, fit, fit_constrained, stls, CoefficientMatrix, ConstraintMask,
    StlsResult, DEFAULT_MAX_ITER,
};
