//! Experiment configuration, JSON-serializable for the CLI.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::BaselineParams;
use crate::dynamics;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    /// Right-hand side evaluated at the stored states.
    Exact,
    /// Second-order finite differences of the states.
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Systems to run, in report row order.
    pub systems: Vec<String>,
    pub n_sims: usize,
    pub n_steps: usize,
    pub seed_base: u64,
    pub sindy_threshold: f64,
    /// Per-system threshold overrides; systems with very small governing
    /// coefficients need a finer cut.
    pub sindy_threshold_overrides: BTreeMap<String, f64>,
    pub sindy_max_degree: u32,
    pub sindy_include_trig: bool,
    /// Per-system integration-step overrides.
    pub dt_overrides: BTreeMap<String, f64>,
    pub baseline: BaselineParams,
    /// Noise augmentation flag; experiment 1 requires false, experiment 2
    /// requires true, experiment 3 honors it (default true).
    pub noise: bool,
    pub derivative_mode: DerivativeMode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let mut overrides = BTreeMap::new();
        overrides.insert("fitzhugh_nagumo".to_string(), 0.005);
        overrides.insert("mrw".to_string(), 0.005);
        ExperimentConfig {
            systems: dynamics::catalog().iter().map(|s| s.name.to_string()).collect(),
            n_sims: 10,
            n_steps: 1000,
            seed_base: 0,
            sindy_threshold: 0.1,
            sindy_threshold_overrides: overrides,
            sindy_max_degree: 3,
            sindy_include_trig: true,
            dt_overrides: BTreeMap::new(),
            baseline: BaselineParams::default(),
            noise: true,
            derivative_mode: DerivativeMode::Exact,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.systems.is_empty() {
            return Err(Error::Usage("config: systems list is empty".into()));
        }
        for name in &self.systems {
            dynamics::by_name(name)?;
        }
        if self.n_sims == 0 {
            return Err(Error::Usage("config: n_sims must be >= 1".into()));
        }
        if self.n_steps < 3 {
            return Err(Error::Usage("config: n_steps must be >= 3".into()));
        }
        if self.sindy_threshold <= 0.0 {
            return Err(Error::Usage("config: sindy_threshold must be positive".into()));
        }
        if self.sindy_max_degree == 0 {
            return Err(Error::Usage("config: sindy_max_degree must be >= 1".into()));
        }
        self.baseline.validate()?;
        Ok(())
    }

    pub fn with_noise(mut self, noise: bool) -> Self {
        self.noise = noise;
        self
    }

    pub fn threshold_for(&self, system: &str) -> f64 {
        self.sindy_threshold_overrides
            .get(system)
            .copied()
            .unwrap_or(self.sindy_threshold)
    }

    pub fn dt_for(&self, system: &str, default_dt: f64) -> f64 {
        self.dt_overrides.get(system).copied().unwrap_or(default_dt)
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            detail: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text, path)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
