//! Benchmark pipeline for sparse system identification as a causal-discovery
//! tool: simulate benchmark dynamical systems, learn their governing
//! equations with sequential thresholded least squares, extract causal
//! graphs, and compare against four causal-discovery baselines under clean
//! and noise-augmented conditions.

pub mod baselines;
pub mod causal;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod numkernel;
pub mod sindy;

pub use error::{Error, Result};
