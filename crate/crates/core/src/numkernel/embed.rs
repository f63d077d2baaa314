//! Delay embeddings and nearest-neighbor queries for state-space methods.

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Takens delay embedding: row t holds (x(t), x(t-tau), ..., x(t-(E-1)tau)),
/// indexed so every row uses only available samples. The first row of the
/// output corresponds to original time index (E-1)*tau.
pub fn delay_embedding(x: ArrayView1<f64>, e: usize, tau: usize) -> Result<Array2<f64>> {
    let m = x.len();
    if e == 0 || tau == 0 {
        return Err(Error::Input("delay_embedding: E and tau must be >= 1".into()));
    }
    let offset = (e - 1) * tau;
    if m <= offset {
        return Err(Error::Size(format!(
            "delay_embedding: series of length {m} too short for E = {e}, tau = {tau}"
        )));
    }
    let rows = m - offset;
    let mut out = Array2::zeros((rows, e));
    for r in 0..rows {
        let t = r + offset;
        for c in 0..e {
            out[[r, c]] = x[t - c * tau];
        }
    }
    Ok(out)
}

/// Indices of the `k` nearest rows of `points` to `points[query_row]` by
/// Euclidean distance, excluding the query row itself. Ties break toward
/// the lower index.
pub fn knn_indices(points: ArrayView2<f64>, query_row: usize, k: usize) -> Result<Vec<usize>> {
    let n = points.nrows();
    if query_row >= n {
        return Err(Error::Size(format!(
            "knn_indices: query_row {query_row} out of range for {n} points"
        )));
    }
    if k >= n {
        return Err(Error::Size(format!(
            "knn_indices: k = {k} must be below the point count {n}"
        )));
    }
    let query = points.row(query_row);
    let mut dists: Vec<(f64, usize)> = (0..n)
        .filter(|&i| i != query_row)
        .map(|i| {
            let d: f64 = points
                .row(i)
                .iter()
                .zip(query.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            (d, i)
        })
        .collect();
    dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    Ok(dists.into_iter().take(k).map(|(_, i)| i).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn embedding_matches_hand_construction() {
        let x = array![1.0, 2.0, 3.0, 4.0, 5.0];
        let emb = delay_embedding(x.view(), 2, 1).unwrap();
        let expected = array![[2.0, 1.0], [3.0, 2.0], [4.0, 3.0], [5.0, 4.0]];
        assert_eq!(emb, expected);
    }

    #[test]
    fn dimension_one_is_a_copy() {
        let x = array![3.0, 1.0, 4.0];
        let emb = delay_embedding(x.view(), 1, 1).unwrap();
        assert_eq!(emb.column(0).to_owned(), x);
    }

    #[test]
    fn lagged_rows_enumerated_by_hand() {
        let x = array![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let emb = delay_embedding(x.view(), 3, 2).unwrap();
        let expected = array![[5.0, 3.0, 1.0], [6.0, 4.0, 2.0]];
        assert_eq!(emb, expected);
    }

    #[test]
    fn too_short_series_errors() {
        let x = array![1.0, 2.0];
        assert!(matches!(
            delay_embedding(x.view(), 3, 1),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn row_count_formula_exhaustive() {
        for m in 1..=30usize {
            let x = Array1::from_iter((0..m).map(|i| i as f64));
            for e in 1..=4usize {
                for tau in 1..=5usize {
                    let res = delay_embedding(x.view(), e, tau);
                    if m > (e - 1) * tau {
                        assert_eq!(res.unwrap().nrows(), m - (e - 1) * tau);
                    } else {
                        assert!(res.is_err());
                    }
                }
            }
        }
    }

    #[test]
    fn knn_on_a_line() {
        let pts = array![[0.0], [1.0], [2.0], [10.0]];
        let idx = knn_indices(pts.view(), 1, 2).unwrap();
        assert_eq!(idx.len(), 2);
        assert!(idx.contains(&0) && idx.contains(&2));
    }

    #[test]
    fn duplicates_come_before_farther_points() {
        let pts = array![[0.0, 0.0], [1.0, 1.0], [1.0, 1.0], [5.0, 5.0]];
        let idx = knn_indices(pts.view(), 1, 2).unwrap();
        assert_eq!(idx[0], 2); // exact duplicate first
        assert_eq!(idx[1], 0);
    }

    #[test]
    fn matches_brute_force_sort() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts = Array2::from_shape_fn((100, 2), |_| rng.random_range(-1.0..1.0));
        let got = knn_indices(pts.view(), 0, 5).unwrap();
        let q = pts.row(0).to_owned();
        let mut all: Vec<(f64, usize)> = (1..100)
            .map(|i| {
                let d: f64 = pts
                    .row(i)
                    .iter()
                    .zip(q.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (d, i)
            })
            .collect();
        all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let expected: Vec<usize> = all.into_iter().take(5).map(|(_, i)| i).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn k_too_large_errors() {
        let pts = array![[0.0], [1.0]];
        assert!(matches!(
            knn_indices(pts.view(), 0, 2),
            Err(Error::Size(_))
        ));
    }
}
