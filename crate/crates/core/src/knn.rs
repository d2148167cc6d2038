//! Exact k-nearest-neighbor search and neighborhood graph construction.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{sq_euclidean, DataMatrix};

/// The `k` batch rows closest to a query point, nearest first.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborQuery {
    pub indices: Vec<usize>,
    pub distances: Vec<f64>,
}

impl NeighborQuery {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.distances.iter().copied())
    }
}

#[inline]
fn by_distance_then_index(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Picks the `k` smallest `(squared distance, index)` pairs in order.
fn take_k_smallest(mut cand: Vec<(f64, usize)>, k: usize) -> NeighborQuery {
    if k < cand.len() {
        cand.select_nth_unstable_by(k - 1, by_distance_then_index);
        cand.truncate(k);
    }
    cand.sort_unstable_by(by_distance_then_index);
    NeighborQuery {
        indices: cand.iter().map(|c| c.1).collect(),
        distances: cand.iter().map(|c| c.0.sqrt()).collect(),
    }
}

/// Exact `k` nearest rows of `batch` to `x`, ties broken by lower row index.
pub fn knn_query(batch: &DataMatrix, x: &[f64], k: usize) -> Result<NeighborQuery> {
    if x.len() != batch.dim() {
        return Err(Error::DimensionMismatch { expected: batch.dim(), found: x.len() });
    }
    if k == 0 || k > batch.rows() {
        return Err(Error::invalid(format!(
            "k must be in [1, {}], got {k}",
            batch.rows()
        )));
    }
    let cand = batch.iter_rows().enumerate().map(|(i, r)| (sq_euclidean(r, x), i)).collect();
    Ok(take_k_smallest(cand, k))
}

/// Symmetrized k-nearest-neighbor graph with Euclidean edge lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    n: usize,
    k: usize,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl NeighborGraph {
    /// Builds an undirected graph from an explicit edge list. Each edge is
    /// inserted in both directions; duplicates keep the shorter length.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut directed = vec![Vec::new(); n];
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::invalid(format!("edge ({i}, {j}) out of range for {n} nodes")));
            }
            if i == j {
                return Err(Error::invalid(format!("self-loop at node {i}")));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::invalid(format!("edge ({i}, {j}) has invalid length {w}")));
            }
            directed[i].push((j, w));
        }
        Ok(Self { n, k: 0, adjacency: symmetrize(directed) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Neighbor count used at construction (0 for graphs built from edges).
    pub fn k(&self) -> usize {
        self.k
    }

    /// Neighbors of node `i` with edge lengths, sorted by neighbor index.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Undirected edges `(i, j, length)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, nb)| {
            nb.iter().filter(move |&&(j, _)| j > i).map(move |&(j, w)| (i, j, w))
        })
    }
}

/// Union symmetrization: `(i, j)` is an edge if either endpoint lists the other.
fn symmetrize(directed: Vec<Vec<(usize, f64)>>) -> Vec<Vec<(usize, f64)>> {
    let mut adj: Vec<Vec<(usize, f64)>> = directed.clone();
    for (i, out) in directed.iter().enumerate() {
        for &(j, w) in out {
            adj[j].push((i, w));
        }
    }
    for list in &mut adj {
        list.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        list.dedup_by_key(|e| e.0);
    }
    adj
}

/// Directed k-nearest-neighbor lists (self excluded), before symmetrization.
pub fn knn_lists(x: &DataMatrix, k: usize) -> Result<Vec<NeighborQuery>> {
    let n = x.rows();
    if k == 0 || k >= n {
        return Err(Error::invalid(format!("k must be in [1, {n}), got {k}")));
    }
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let xi = x.row(i);
            let cand = x
                .iter_rows()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, r)| (sq_euclidean(r, xi), j))
                .collect();
            take_k_smallest(cand, k)
        })
        .collect())
}

pub fn knn_graph(x: &DataMatrix, k: usize) -> Result<NeighborGraph> {
    let lists = knn_lists(x, k)?;
    let directed = lists.into_iter().map(|q| q.iter().collect()).collect();
    Ok(NeighborGraph { n: x.rows(), k, adjacency: symmetrize(directed) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, d: usize, seed: u64) -> DataMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect();
        DataMatrix::new(n, d, v).unwrap()
    }

    /// Full argsort of the distance vector, used as the brute-force oracle.
    fn argsort_oracle(x: &DataMatrix, q: &[f64]) -> Vec<(usize, f64)> {
        let mut all: Vec<(usize, f64)> = x
            .iter_rows()
            .enumerate()
            .map(|(i, r)| (i, r.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()))
            .collect();
        all.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
        all
    }

    #[test]
    fn collinear_three_points() {
        let x = DataMatrix::from_rows(&[[0.0], [1.0], [3.0]]).unwrap();
        let lists = knn_lists(&x, 1).unwrap();
        let out: Vec<usize> = lists.iter().map(|q| q.indices[0]).collect();
        assert_eq!(out, vec![1, 0, 1]);
        let g = knn_graph(&x, 1).unwrap();
        let edges: Vec<_> = g.edges().collect();
        assert_eq!(edges, vec![(0, 1, 1.0), (1, 2, 2.0)]);
    }

    #[test]
    fn k_n_minus_one_is_complete() {
        let x = random_matrix(12, 3, 1);
        let g = knn_graph(&x, 11).unwrap();
        assert_eq!(g.edge_count(), 12 * 11 / 2);
        for i in 0..12 {
            assert_eq!(g.degree(i), 11);
        }
    }

    #[test]
    fn duplicates_get_zero_length_edge() {
        let x = DataMatrix::from_rows(&[[0.0, 0.0], [5.0, 5.0], [0.0, 0.0], [9.0, 1.0]]).unwrap();
        let g = knn_graph(&x, 1).unwrap();
        assert!(g.neighbors(0).contains(&(2, 0.0)));
        assert!(g.neighbors(2).contains(&(0, 0.0)));
    }

    #[test]
    fn k_out_of_range() {
        let x = random_matrix(5, 2, 2);
        assert!(knn_graph(&x, 5).is_err());
        assert!(knn_graph(&x, 0).is_err());
        assert!(knn_query(&x, &[0.0, 0.0], 6).is_err());
        assert!(knn_query(&x, &[0.0, 0.0], 0).is_err());
        assert!(matches!(
            knn_query(&x, &[0.0], 1),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn query_on_batch_row_returns_itself() {
        let x = random_matrix(40, 4, 3);
        let q = knn_query(&x, x.row(5), 1).unwrap();
        assert_eq!(q.indices, vec![5]);
        assert_eq!(q.distances, vec![0.0]);
    }

    #[test]
    fn ties_go_to_lower_index() {
        let x = DataMatrix::from_rows(&[
            [10.0, 0.0],
            [10.0, 1.0],
            [-1.0, 0.0],
            [10.0, 2.0],
            [10.0, 3.0],
            [10.0, 4.0],
            [10.0, 5.0],
            [1.0, 0.0],
        ])
        .unwrap();
        let q = knn_query(&x, &[0.0, 0.0], 1).unwrap();
        assert_eq!(q.indices, vec![2]);
        let q = knn_query(&x, &[0.0, 0.0], 2).unwrap();
        assert_eq!(q.indices, vec![2, 7]);
    }

    #[test]
    fn query_matches_full_argsort() {
        let x = random_matrix(100, 10, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let q: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
            for k in [1, 7, 100] {
                let got = knn_query(&x, &q, k).unwrap();
                let want = argsort_oracle(&x, &q);
                assert_eq!(got.indices, want[..k].iter().map(|w| w.0).collect::<Vec<_>>());
                for (a, b) in got.distances.iter().zip(&want[..k]) {
                    assert!((a - b.1).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn graph_is_symmetric_with_k_out_edges() {
        let x = random_matrix(80, 3, 6);
        let k = 5;
        for q in knn_lists(&x, k).unwrap() {
            assert_eq!(q.len(), k);
        }
        let g = knn_graph(&x, k).unwrap();
        for i in 0..g.n() {
            assert!(g.degree(i) >= k);
            for &(j, w) in g.neighbors(i) {
                assert_ne!(i, j);
                assert!(w >= 0.0 && w.is_finite());
                let back = g.neighbors(j).iter().find(|e| e.0 == i).expect("missing reverse edge");
                assert_eq!(back.1, w);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn returned_neighbors_are_nearest(n in 2usize..500, k_frac in 0.0f64..1.0, seed in any::<u64>()) {
            let x = random_matrix(n, 3, seed);
            let k = 1 + ((n - 1) as f64 * k_frac) as usize;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
            let q: Vec<f64> = (0..3).map(|_| rng.random_range(-1.5..1.5)).collect();
            let res = knn_query(&x, &q, k).unwrap();
            prop_assert!(res.distances.windows(2).all(|w| w[0] <= w[1]));
            let worst = *res.distances.last().unwrap();
            for (i, r) in x.iter_rows().enumerate() {
                if !res.indices.contains(&i) {
                    let d = sq_euclidean(r, &q).sqrt();
                    prop_assert!(worst <= d);
                }
            }
            let i = seed as usize % n;
            prop_assert_eq!(knn_query(&x, x.row(i), k).unwrap().distances[0], 0.0);
        }
    }
}
