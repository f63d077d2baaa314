//! Comparison causal-discovery algorithms: bivariate Granger causality,
//! convergent cross mapping, a two-stage lag-based conditional-independence
//! procedure, and ICA-based linear non-Gaussian modeling.

pub mod ccm;
pub mod granger;
pub mod lingam;
pub mod pcmci;

use serde::{Deserialize, Serialize};

pub use ccm::ccm;
pub use granger::granger;
pub use lingam::lingam;
pub use pcmci::pcmci;

/// Hyperparameters for all four baselines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineParams {
    pub granger_max_lag: usize,
    pub granger_alpha: f64,
    pub ccm_e: usize,
    pub ccm_tau: usize,
    pub ccm_lib_sizes: Vec<usize>,
    pub ccm_rho_gain: f64,
    pub pcmci_max_lag: usize,
    pub pcmci_alpha: f64,
    pub lingam_prune_threshold: f64,
    /// Seed for the ICA initialization inside the LiNGAM baseline.
    pub seed: u64,
}

impl Default for BaselineParams {
    fn default() -> Self {
        BaselineParams {
            granger_max_lag: 3,
            granger_alpha: 0.01,
            ccm_e: 3,
            ccm_tau: 1,
            ccm_lib_sizes: (20..=500).step_by(40).collect(),
            ccm_rho_gain: 0.1,
            pcmci_max_lag: 3,
            pcmci_alpha: 0.01,
            lingam_prune_threshold: 0.05,
            seed: 0,
        }
    }
}

impl BaselineParams {
    pub fn validate(&self) -> crate::error::Result<()> {
        use crate::error::Error;
        if self.granger_max_lag == 0 || self.ccm_tau == 0 || self.pcmci_max_lag == 0 {
            return Err(Error::Input("baseline lags must be >= 1".into()));
        }
        if self.ccm_e == 0 {
            return Err(Error::Input("ccm embedding dimension must be >= 1".into()));
        }
        for alpha in [self.granger_alpha, self.pcmci_alpha] {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::Input(format!("alpha must lie in (0,1), got {alpha}")));
            }
        }
        if self.ccm_lib_sizes.is_empty() || self.ccm_lib_sizes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Input(
                "ccm_lib_sizes must be a non-empty increasing list".into(),
            ));
        }
        Ok(())
    }
}
