//! Candidate function libraries: feature definitions with explicit
//! variable-dependency sets, and their evaluation into the regression matrix.

use std::collections::BTreeSet;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// The function family of one library column.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureKind {
    Constant,
    /// Exponent per variable; total degree is the exponent sum.
    Monomial(Vec<u32>),
    Sine(usize),
    Cosine(usize),
    /// Product of the named variables raised to a real exponent.
    Power(Vec<usize>, f64),
}

/// One candidate function together with the exact set of variables it reads.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec {
    id: String,
    kind: FeatureKind,
    depends_on: BTreeSet<usize>,
}

impl FeatureSpec {
    pub fn constant() -> Self {
        FeatureSpec {
            id: "1".into(),
            kind: FeatureKind::Constant,
            depends_on: BTreeSet::new(),
        }
    }

    pub fn monomial(exponents: Vec<u32>) -> Self {
        let depends_on: BTreeSet<usize> = exponents
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(j, _)| j)
            .collect();
        let id = monomial_id(&exponents);
        FeatureSpec {
            id,
            kind: FeatureKind::Monomial(exponents),
            depends_on,
        }
    }

    pub fn sine(var: usize) -> Self {
        FeatureSpec {
            id: format!("sin(x{var})"),
            kind: FeatureKind::Sine(var),
            depends_on: BTreeSet::from([var]),
        }
    }

    pub fn cosine(var: usize) -> Self {
        FeatureSpec {
            id: format!("cos(x{var})"),
            kind: FeatureKind::Cosine(var),
            depends_on: BTreeSet::from([var]),
        }
    }

    pub fn power(vars: Vec<usize>, exponent: f64, id: impl Into<String>) -> Self {
        let depends_on: BTreeSet<usize> = vars.iter().copied().collect();
        FeatureSpec {
            id: id.into(),
            kind: FeatureKind::Power(vars, exponent),
            depends_on,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> &FeatureKind {
        &self.kind
    }

    pub fn depends_on(&self) -> &BTreeSet<usize> {
        &self.depends_on
    }

    fn eval(&self, row: &[f64]) -> f64 {
        match &self.kind {
            FeatureKind::Constant => 1.0,
            FeatureKind::Monomial(exps) => exps
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(j, &e)| row[j].powi(e as i32))
                .product(),
            FeatureKind::Sine(j) => row[*j].sin(),
            FeatureKind::Cosine(j) => row[*j].cos(),
            FeatureKind::Power(vars, exp) => {
                let base: f64 = vars.iter().map(|&j| row[j]).product();
                base.powf(*exp)
            }
        }
    }
}

fn monomial_id(exponents: &[u32]) -> String {
    let parts: Vec<String> = exponents
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(j, &e)| {
            if e == 1 {
                format!("x{j}")
            } else {
                format!("x{j}^{e}")
            }
        })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

/// Ordered feature list over `p` input variables.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateLibrary {
    features: Vec<FeatureSpec>,
    p: usize,
}

impl CandidateLibrary {
    pub fn new(features: Vec<FeatureSpec>, p: usize) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for f in &features {
            if !seen.insert(f.id().to_string()) {
                return Err(Error::Conflict(format!("duplicate feature id {:?}", f.id())));
            }
            if let Some(&max) = f.depends_on().iter().max() {
                if max >= p {
                    return Err(Error::Size(format!(
                        "feature {:?} depends on x{max} but p = {p}",
                        f.id()
                    )));
                }
            }
        }
        Ok(CandidateLibrary { features, p })
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.features.iter().position(|f| f.id() == id)
    }
}

/// Exponent vectors of total degree `d` over `p` variables, graded-lex:
/// earlier variables carry the higher exponents first.
fn exponent_vectors(d: u32, p: usize) -> Vec<Vec<u32>> {
    if p == 1 {
        return vec![vec![d]];
    }
    let mut out = Vec::new();
    for e0 in (0..=d).rev() {
        for mut rest in exponent_vectors(d - e0, p - 1) {
            let mut v = Vec::with_capacity(p);
            v.push(e0);
            v.append(&mut rest);
            out.push(v);
        }
    }
    out
}

/// Constant + all monomials of total degree <= `max_degree` in graded-lex
/// order, optionally sin/cos of each variable, then any extra features.
pub fn default_library(
    p: usize,
    max_degree: u32,
    include_trig: bool,
    extra: Vec<FeatureSpec>,
) -> Result<CandidateLibrary> {
    if p == 0 {
        return Err(Error::Input("default_library: p must be >= 1".into()));
    }
    if max_degree == 0 {
        return Err(Error::Input("default_library: max_degree must be >= 1".into()));
    }
    let mut features = vec![FeatureSpec::constant()];
    for d in 1..=max_degree {
        for exps in exponent_vectors(d, p) {
            features.push(FeatureSpec::monomial(exps));
        }
    }
    if include_trig {
        for j in 0..p {
            features.push(FeatureSpec::sine(j));
        }
        for j in 0..p {
            features.push(FeatureSpec::cosine(j));
        }
    }
    features.extend(extra);
    CandidateLibrary::new(features, p)
}

/// Evaluate every feature row-wise over the states, producing the m x F
/// regression matrix.
pub fn evaluate_library(lib: &CandidateLibrary, x: ArrayView2<f64>) -> Result<Array2<f64>> {
    let (m, p) = x.dim();
    if p != lib.p() {
        return Err(Error::Size(format!(
            "evaluate_library: states have {p} columns but library expects {}",
            lib.p()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("evaluate_library: non-finite state entries".into()));
    }
    let mut theta = Array2::zeros((m, lib.len()));
    let mut row_buf = vec![0.0; p];
    for i in 0..m {
        for (j, v) in x.row(i).iter().enumerate() {
            row_buf[j] = *v;
        }
        for (f, feature) in lib.features().iter().enumerate() {
            if let FeatureKind::Power(vars, _) = feature.kind() {
                let base: f64 = vars.iter().map(|&j| row_buf[j]).product();
                if base <= 0.0 {
                    return Err(Error::Domain(format!(
                        "feature {:?} has non-positive base {base} at row {i}",
                        feature.id()
                    )));
                }
            }
            let v = feature.eval(&row_buf);
            if !v.is_finite() {
                return Err(Error::Domain(format!(
                    "feature {:?} evaluated non-finite at row {i}",
                    feature.id()
                )));
            }
            theta[[i, f]] = v;
        }
    }
    Ok(theta)
}
