//! Time-stamped state/derivative matrices and their CSV interchange format.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Prefix used for the fresh identifiers of appended noise channels; the CSV
/// importer relies on it to recover `n_system`.
pub const NOISE_NAME_PREFIX: &str = "noise";

/// One simulation run: m samples of p variables plus their derivatives.
///
/// Columns `0..n_system` are the true system variables; any further columns
/// are noise channels added by augmentation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Array1<f64>,
    pub states: Array2<f64>,
    pub derivs: Array2<f64>,
    pub var_names: Vec<String>,
    pub n_system: usize,
}

impl Trajectory {
    pub fn n_samples(&self) -> usize {
        self.states.nrows()
    }

    pub fn n_vars(&self) -> usize {
        self.states.ncols()
    }

    /// Uniform sample spacing. Requires at least two samples.
    pub fn dt(&self) -> Result<f64> {
        if self.times.len() < 2 {
            return Err(Error::Size("trajectory has fewer than two samples".into()));
        }
        Ok(self.times[1] - self.times[0])
    }

    /// Check the structural invariants: matching shapes, finite entries,
    /// strictly increasing uniformly spaced times.
    pub fn validate(&self) -> Result<()> {
        let m = self.n_samples();
        let p = self.n_vars();
        if self.derivs.dim() != (m, p) {
            return Err(Error::Size("states and derivs shapes differ".into()));
        }
        if self.times.len() != m {
            return Err(Error::Size("times length differs from sample count".into()));
        }
        if self.var_names.len() != p {
            return Err(Error::Size("var_names length differs from column count".into()));
        }
        if self.n_system == 0 || self.n_system > p {
            return Err(Error::Size("n_system out of range".into()));
        }
        if self
            .states
            .iter()
            .chain(self.derivs.iter())
            .chain(self.times.iter())
            .any(|v| !v.is_finite())
        {
            return Err(Error::Input("trajectory contains non-finite entries".into()));
        }
        if m >= 2 {
            let dt = self.times[1] - self.times[0];
            if dt <= 0.0 {
                return Err(Error::Input("times are not strictly increasing".into()));
            }
            for i in 1..m {
                let step = self.times[i] - self.times[i - 1];
                if (step - dt).abs() > 1e-9 * dt.max(1.0) {
                    return Err(Error::Input(format!(
                        "non-uniform spacing at sample {i}: {step} vs {dt}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Render as CSV: header of variable names, then one row
    /// `t, x_1..x_p, dx_1..dx_p` per sample at 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push('t');
        for name in &self.var_names {
            out.push(',');
            out.push_str(name);
        }
        for name in &self.var_names {
            out.push_str(",d");
            out.push_str(name);
        }
        out.push('\n');
        for i in 0..self.n_samples() {
            out.push_str(&fmt_f64(self.times[i]));
            for j in 0..self.n_vars() {
                out.push(',');
                out.push_str(&fmt_f64(self.states[[i, j]]));
            }
            for j in 0..self.n_vars() {
                out.push(',');
                out.push_str(&fmt_f64(self.derivs[[i, j]]));
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

    pub fn from_csv(text: &str, origin: &Path) -> Result<Self> {
        let parse_err = |detail: String| Error::Parse {
            path: origin.to_path_buf(),
            detail,
        };
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| parse_err("empty trajectory file".into()))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 3 || cols[0] != "t" || !(cols.len() - 1).is_multiple_of(2) {
            return Err(parse_err(format!("malformed header: {header}")));
        }
        let p = (cols.len() - 1) / 2;
        let var_names: Vec<String> = cols[1..=p].iter().map(|s| s.to_string()).collect();
        for (j, name) in cols[p + 1..].iter().enumerate() {
            let expected = format!("d{}", var_names[j]);
            if *name != expected {
                return Err(parse_err(format!(
                    "derivative header {name} does not match {expected}"
                )));
            }
        }

        let mut times = Vec::new();
        let mut states = Vec::new();
        let mut derivs = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 1 + 2 * p {
                return Err(parse_err(format!(
                    "row {} has {} fields, expected {}",
                    lineno + 2,
                    fields.len(),
                    1 + 2 * p
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| parse_err(format!("row {}: {e}", lineno + 2)))
            };
            times.push(parse(fields[0])?);
            for f in &fields[1..=p] {
                states.push(parse(f)?);
            }
            for f in &fields[p + 1..] {
                derivs.push(parse(f)?);
            }
        }
        let m = times.len();
        if m == 0 {
            return Err(parse_err("no data rows".into()));
        }
        let n_system = var_names
            .iter()
            .take_while(|n| !n.starts_with(NOISE_NAME_PREFIX))
            .count()
            .max(1);
        let traj = Trajectory {
            times: Array1::from_vec(times),
            states: Array2::from_shape_vec((m, p), states)
                .map_err(|e| parse_err(e.to_string()))?,
            derivs: Array2::from_shape_vec((m, p), derivs)
                .map_err(|e| parse_err(e.to_string()))?,
            var_names,
            n_system,
        };
        traj.validate()?;
        Ok(traj)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_csv(&text, path)
    }
}

/// 17-significant-digit rendering; enough to round-trip any f64 exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn sample_traj() -> Trajectory {
        Trajectory {
            times: array![0.0, 0.1, 0.2],
            states: array![[1.0, 2.0], [1.1, 2.1], [1.2, 2.2]],
            derivs: array![[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]],
            var_names: vec!["x".into(), "y".into()],
            n_system: 2,
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let traj = sample_traj();
        let csv = traj.to_csv();
        let back = Trajectory::from_csv(&csv, Path::new("test.csv")).unwrap();
        assert_eq!(traj, back);
    }

    #[test]
    fn awkward_floats_survive_round_trip() {
        let mut traj = sample_traj();
        traj.states[[0, 0]] = std::f64::consts::PI;
        traj.states[[1, 1]] = 1.0 / 3.0;
        traj.derivs[[2, 0]] = -2.2250738585072014e-308;
        let back = Trajectory::from_csv(&traj.to_csv(), Path::new("t.csv")).unwrap();
        assert_eq!(traj, back);
    }

    #[test]
    fn noise_names_recover_n_system() {
        let mut traj = sample_traj();
        traj.var_names = vec!["x".into(), "noise1".into()];
        traj.n_system = 1;
        let back = Trajectory::from_csv(&traj.to_csv(), Path::new("t.csv")).unwrap();
        assert_eq!(back.n_system, 1);
    }

    #[test]
    fn malformed_header_rejected() {
        let res = Trajectory::from_csv("a,b,c\n1,2,3\n", Path::new("t.csv"));
        assert!(matches!(res, Err(Error::Parse { .. })));
    }

    #[test]
    fn validate_catches_shape_mismatch() {
        let mut traj = sample_traj();
        traj.derivs = array![[1.0], [1.0], [1.0]];
        assert!(traj.validate().is_err());
    }
}
