//! Binary causal graphs over system variables, the normalized Hamming
//! metric used for scoring, and conversion of discovered graphs into
//! feature constraints for the sparse regression.
//!
//! Adjacency convention: `adj[i][j] = 1` means variable j is a direct cause
//! of variable i, i.e. j appears in the governing equation of i.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::sindy::{CandidateLibrary, ConstraintMask};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalGraph {
    adj: Array2<u8>,
    var_names: Vec<String>,
}

impl CausalGraph {
    pub fn new(adj: Array2<u8>, var_names: Vec<String>) -> Result<Self> {
        let n = adj.nrows();
        if adj.ncols() != n {
            return Err(Error::Size("adjacency matrix must be square".into()));
        }
        if var_names.len() != n {
            return Err(Error::Size("var_names length must equal matrix side".into()));
        }
        if adj.iter().any(|&v| v > 1) {
            return Err(Error::Input("adjacency entries must be 0 or 1".into()));
        }
        Ok(CausalGraph { adj, var_names })
    }

    pub fn empty(var_names: Vec<String>) -> Self {
        let n = var_names.len();
        CausalGraph {
            adj: Array2::zeros((n, n)),
            var_names,
        }
    }

    pub fn complete(var_names: Vec<String>) -> Self {
        let n = var_names.len();
        CausalGraph {
            adj: Array2::ones((n, n)),
            var_names,
        }
    }

    /// Build from (effect, cause) pairs.
    pub fn from_edges(var_names: Vec<String>, edges: &[(usize, usize)]) -> Result<Self> {
        let n = var_names.len();
        let mut adj = Array2::zeros((n, n));
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::Size(format!("edge ({i}, {j}) out of range for n = {n}")));
            }
            adj[[i, j]] = 1;
        }
        Ok(CausalGraph { adj, var_names })
    }

    pub fn n(&self) -> usize {
        self.adj.nrows()
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn adjacency(&self) -> &Array2<u8> {
        &self.adj
    }

    /// True when j is a direct cause of i.
    pub fn has_edge(&self, effect: usize, cause: usize) -> bool {
        self.adj[[effect, cause]] == 1
    }

    pub fn set_edge(&mut self, effect: usize, cause: usize, present: bool) {
        self.adj[[effect, cause]] = u8::from(present);
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|&v| v as usize).sum()
    }

    /// Parent set of one variable (its direct causes).
    pub fn parents(&self, effect: usize) -> Vec<usize> {
        (0..self.n()).filter(|&j| self.has_edge(effect, j)).collect()
    }

    /// CSV adjacency with a header of variable names; entries 0/1.
    pub fn to_csv(&self) -> String {
        let mut out = self.var_names.join(",");
        out.push('\n');
        for i in 0..self.n() {
            let row: Vec<String> = (0..self.n())
                .map(|j| self.adj[[i, j]].to_string())
                .collect();
            out.push_str(&row.join(","));
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
        let header = lines.next().ok_or_else(|| parse_err("empty graph file".into()))?;
        let var_names: Vec<String> = header.split(',').map(|s| s.to_string()).collect();
        let n = var_names.len();
        let mut adj = Array2::zeros((n, n));
        for (i, line) in lines.enumerate() {
            if i >= n {
                return Err(parse_err("more rows than variables".into()));
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != n {
                return Err(parse_err(format!("row {} has {} fields", i + 1, fields.len())));
            }
            for (j, f) in fields.iter().enumerate() {
                adj[[i, j]] = match f.trim() {
                    "0" => 0,
                    "1" => 1,
                    other => return Err(parse_err(format!("bad adjacency entry {other}"))),
                };
            }
        }
        CausalGraph::new(adj, var_names)
    }

    /// Edge list rendering `cause -> effect`, one per line, row-major order.
    pub fn edge_list(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n() {
            for j in 0..self.n() {
                if self.has_edge(i, j) {
                    out.push_str(&format!("{} -> {}\n", self.var_names[j], self.var_names[i]));
                }
            }
        }
        out
    }
}

/// Fraction of adjacency entries (diagonal included) on which the two
/// graphs disagree; lies in [0, 1].
pub fn hamming_loss(g1: &CausalGraph, g2: &CausalGraph) -> Result<f64> {
    let n = g1.n();
    if g2.n() != n {
        return Err(Error::Size(format!(
            "hamming_loss: graph sizes differ ({n} vs {})",
            g2.n()
        )));
    }
    let differing = g1
        .adjacency()
        .iter()
        .zip(g2.adjacency().iter())
        .filter(|(a, b)| a != b)
        .count();
    Ok(differing as f64 / (n * n) as f64)
}

/// Convert a discovered graph into a per-(feature, equation) permission
/// mask: a feature is allowed in equation i only when every variable it
/// depends on is a parent of i. Constant features are always allowed.
pub fn graph_to_constraint_mask(g: &CausalGraph, lib: &CandidateLibrary) -> Result<ConstraintMask> {
    if lib.p() != g.n() {
        return Err(Error::Size(format!(
            "graph_to_constraint_mask: library has p = {} but graph has n = {}",
            lib.p(),
            g.n()
        )));
    }
    let num_features = lib.features().len();
    let p = lib.p();
    let mut allowed = Array2::from_elem((num_features, p), false);
    for (f, feature) in lib.features().iter().enumerate() {
        for i in 0..p {
            allowed[[f, i]] = feature.depends_on().iter().all(|&j| g.has_edge(i, j));
        }
    }
    Ok(ConstraintMask::new(allowed))
}

/// Top-left k x k subgraph with the first k names.
pub fn graph_restrict(g: &CausalGraph, k: usize) -> Result<CausalGraph> {
    if k > g.n() {
        return Err(Error::Size(format!(
            "graph_restrict: k = {k} exceeds n = {}",
            g.n()
        )));
    }
    let adj = g.adjacency().slice(ndarray::s![..k, ..k]).to_owned();
    CausalGraph::new(adj, g.var_names()[..k].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{by_name, ground_truth_graph};
    use crate::sindy::default_library;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("x{i}")).collect()
    }

    fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> CausalGraph {
        let adj = Array2::from_shape_fn((n, n), |_| u8::from(rng.random_bool(0.5)));
        CausalGraph::new(adj, names(n)).unwrap()
    }

    #[test]
    fn identical_graphs_have_zero_loss() {
        let g = random_graph(&mut ChaCha8Rng::seed_from_u64(1), 4);
        assert_eq!(hamming_loss(&g, &g).unwrap(), 0.0);
    }

    #[test]
    fn complement_has_loss_one() {
        let g = random_graph(&mut ChaCha8Rng::seed_from_u64(2), 3);
        let comp = CausalGraph::new(g.adjacency().mapv(|v| 1 - v), names(3)).unwrap();
        assert_eq!(hamming_loss(&g, &comp).unwrap(), 1.0);
    }

    #[test]
    fn lorenz_truth_vs_empty() {
        let spec = by_name("lorenz").unwrap();
        let truth = ground_truth_graph(&spec, false);
        assert_eq!(truth.edge_count(), 7);
        let empty = CausalGraph::empty(truth.var_names().to_vec());
        let loss = hamming_loss(&truth, &empty).unwrap();
        assert!((loss - 7.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn size_mismatch_is_an_error() {
        let a = CausalGraph::empty(names(2));
        let b = CausalGraph::empty(names(3));
        assert!(hamming_loss(&a, &b).is_err());
    }

    #[test]
    fn hamming_is_a_scaled_metric_on_all_2x2_pairs() {
        // All 16 two-variable graphs, all 256 ordered pairs.
        let graphs: Vec<CausalGraph> = (0..16u8)
            .map(|bits| {
                let adj = Array2::from_shape_fn((2, 2), |(i, j)| (bits >> (2 * i + j)) & 1);
                CausalGraph::new(adj, names(2)).unwrap()
            })
            .collect();
        for a in &graphs {
            for b in &graphs {
                let dab = hamming_loss(a, b).unwrap();
                let dba = hamming_loss(b, a).unwrap();
                assert_eq!(dab, dba, "symmetry");
                if dab == 0.0 {
                    assert_eq!(a.adjacency(), b.adjacency(), "identity of indiscernibles");
                }
                for c in &graphs {
                    let dac = hamming_loss(a, c).unwrap();
                    let dcb = hamming_loss(c, b).unwrap();
                    assert!(dab <= dac + dcb + 1e-15, "triangle inequality");
                }
            }
        }
    }

    #[test]
    fn hamming_matches_brute_force_on_seeded_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(12345);
        for _ in 0..1000 {
            let n = rng.random_range(1..=6usize);
            let a = random_graph(&mut rng, n);
            let b = random_graph(&mut rng, n);
            let mut differing = 0usize;
            for i in 0..n {
                for j in 0..n {
                    if a.adjacency()[[i, j]] != b.adjacency()[[i, j]] {
                        differing += 1;
                    }
                }
            }
            let expected = differing as f64 / (n * n) as f64;
            assert_eq!(hamming_loss(&a, &b).unwrap(), expected);
        }
    }

    #[test]
    fn complete_graph_allows_everything() {
        let lib = default_library(3, 2, false, Vec::new()).unwrap();
        let g = CausalGraph::complete(names(3));
        let mask = graph_to_constraint_mask(&g, &lib).unwrap();
        assert!(mask.allowed().iter().all(|&a| a));
    }

    #[test]
    fn empty_graph_allows_only_constants() {
        let lib = default_library(3, 2, false, Vec::new()).unwrap();
        let g = CausalGraph::empty(names(3));
        let mask = graph_to_constraint_mask(&g, &lib).unwrap();
        for (f, feature) in lib.features().iter().enumerate() {
            for i in 0..3 {
                assert_eq!(mask.allowed()[[f, i]], feature.depends_on().is_empty());
            }
        }
    }

    #[test]
    fn lorenz_mask_forbids_exactly_z_features_in_first_equation() {
        let spec = by_name("lorenz").unwrap();
        let truth = ground_truth_graph(&spec, false);
        let lib = default_library(3, 2, false, Vec::new()).unwrap();
        let mask = graph_to_constraint_mask(&truth, &lib).unwrap();
        // Parents of x are {x, y}: forbidden features are those touching z.
        for (f, feature) in lib.features().iter().enumerate() {
            let touches_z = feature.depends_on().contains(&2);
            assert_eq!(
                mask.allowed()[[f, 0]],
                !touches_z,
                "feature {}",
                feature.id()
            );
        }
        let forbidden: Vec<&str> = lib
            .features()
            .iter()
            .enumerate()
            .filter(|(f, _)| !mask.allowed()[[*f, 0]])
            .map(|(_, feat)| feat.id())
            .collect();
        assert_eq!(forbidden, vec!["x2", "x0*x2", "x1*x2", "x2^2"]);
    }

    #[test]
    fn mask_is_monotone_in_edges() {
        let lib = default_library(3, 2, true, Vec::new()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let g = random_graph(&mut rng, 3);
            let mask = graph_to_constraint_mask(&g, &lib).unwrap();
            // Add one edge anywhere; no allowed entry may flip to false.
            let i = rng.random_range(0..3);
            let j = rng.random_range(0..3);
            let mut g2 = g.clone();
            g2.set_edge(i, j, true);
            let mask2 = graph_to_constraint_mask(&g2, &lib).unwrap();
            for (a, b) in mask.allowed().iter().zip(mask2.allowed().iter()) {
                assert!(!a | b, "adding an edge disabled a feature");
            }
        }
    }

    #[test]
    fn restrict_round_trips() {
        let spec = by_name("lorenz").unwrap();
        let clean = ground_truth_graph(&spec, false);
        let augmented = ground_truth_graph(&spec, true);
        assert_eq!(graph_restrict(&augmented, 3).unwrap(), clean);
        assert_eq!(graph_restrict(&clean, 3).unwrap(), clean);
        assert_eq!(graph_restrict(&clean, 0).unwrap().n(), 0);
        assert!(graph_restrict(&clean, 4).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = random_graph(&mut ChaCha8Rng::seed_from_u64(77), 4);
        let back = CausalGraph::from_csv(&g.to_csv(), Path::new("g.csv")).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn edge_list_names_causes_first() {
        let g = CausalGraph::from_edges(vec!["a".into(), "b".into()], &[(0, 1)]).unwrap();
        assert_eq!(g.edge_list(), "b -> a\n");
    }
}
