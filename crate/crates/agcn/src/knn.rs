//! Undirected k'-nearest-neighbor graph construction from raw features.
//!
//! Used when a dataset ships attributes but no topology: each sample links
//! to its k' nearest neighbors and the edge set is symmetrized by union, so
//! every node keeps degree >= k'.

use serde::{Deserialize, Serialize};

use crate::error::{AgcnError, Result};
use crate::graph::SparseAdjacency;
use crate::matrix::DenseMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum KnnMetric {
    Euclidean,
    Cosine,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct KnnConfig {
    pub k_prime: usize,
    pub metric: KnnMetric,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig {
            k_prime: 3,
            metric: KnnMetric::Euclidean,
        }
    }
}

/// Connect each sample to its `k_prime` nearest neighbors (self excluded),
/// then symmetrize by union. Distance ties resolve to the lowest index, so
/// the result is deterministic even for duplicated points.
pub fn build_knn_graph(x: &DenseMatrix, cfg: &KnnConfig) -> Result<SparseAdjacency> {
    let n = x.rows();
    if cfg.k_prime == 0 {
        return Err(AgcnError::InvalidArgument("k' must be at least 1".into()));
    }
    if n < cfg.k_prime + 1 {
        return Err(AgcnError::InvalidArgument(format!(
            "need at least k'+1 = {} samples, got {n}",
            cfg.k_prime + 1
        )));
    }
    if !x.all_finite() {
        return Err(AgcnError::Validation("features contain NaN/Inf".into()));
    }
    if cfg.metric == KnnMetric::Cosine {
        for i in 0..n {
            if x.row(i).iter().all(|&v| v == 0.0) {
                return Err(AgcnError::Degenerate(format!(
                    "cosine metric undefined for all-zero row {i}"
                )));
            }
        }
    }

    let mut edges = Vec::with_capacity(n * cfg.k_prime);
    let mut candidates: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
    for i in 0..n {
        candidates.clear();
        for j in 0..n {
            if j != i {
                candidates.push((distance(x, i, j, cfg.metric), j));
            }
        }
        candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        for &(_, j) in candidates.iter().take(cfg.k_prime) {
            edges.push((i, j));
        }
    }
    SparseAdjacency::from_edges(n, &edges)
}

fn distance(x: &DenseMatrix, i: usize, j: usize, metric: KnnMetric) -> f64 {
    let (a, b) = (x.row(i), x.row(j));
    match metric {
        KnnMetric::Euclidean => a
            .iter()
            .zip(b)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt(),
        KnnMetric::Cosine => {
            let dot: f64 = a.iter().zip(b).map(|(p, q)| p * q).sum();
            let na: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
            let nb: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            1.0 - dot / (na * nb)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn collect_edges(a: &SparseAdjacency) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..a.node_count() {
            for (j, _) in a.row(i) {
                if i < j {
                    out.push((i, j));
                }
            }
        }
        out
    }

    #[test]
    fn collinear_points_link_to_geometric_neighbors() {
        let x = DenseMatrix::from_rows(&[vec![0.0], vec![1.0], vec![10.0]]).unwrap();
        let a = build_knn_graph(&x, &KnnConfig { k_prime: 1, metric: KnnMetric::Euclidean })
            .unwrap();
        assert_eq!(collect_edges(&a), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn full_k_gives_complete_graph() {
        let mut rng = Rng::new(8);
        let mut x = DenseMatrix::zeros(6, 3);
        for v in x.data_mut() {
            *v = rng.uniform(-1.0, 1.0);
        }
        let a = build_knn_graph(&x, &KnnConfig { k_prime: 5, metric: KnnMetric::Euclidean })
            .unwrap();
        assert_eq!(a.nnz(), 6 * 5);
    }

    #[test]
    fn matches_exhaustive_distance_sort_oracle() {
        let mut rng = Rng::new(42);
        let n = 50;
        let mut x = DenseMatrix::zeros(n, 4);
        for v in x.data_mut() {
            *v = rng.normal();
        }
        let k = 5;
        let a = build_knn_graph(&x, &KnnConfig { k_prime: k, metric: KnnMetric::Euclidean })
            .unwrap();

        // Brute force: full distance matrix, stable argsort per row, union.
        let mut oracle = std::collections::BTreeSet::new();
        for i in 0..n {
            let mut dists: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d: f64 = x
                        .row(i)
                        .iter()
                        .zip(x.row(j))
                        .map(|(p, q)| (p - q) * (p - q))
                        .sum();
                    (d, j)
                })
                .collect();
            dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for &(_, j) in dists.iter().take(k) {
                oracle.insert((i.min(j), i.max(j)));
            }
        }
        assert_eq!(collect_edges(&a), oracle.into_iter().collect::<Vec<_>>());
    }

    #[test]
    fn union_symmetrization_keeps_min_degree() {
        let mut rng = Rng::new(5);
        let n = 30;
        let mut x = DenseMatrix::zeros(n, 2);
        for v in x.data_mut() {
            *v = rng.normal();
        }
        for k in [1, 3, 5] {
            let a = build_knn_graph(&x, &KnnConfig { k_prime: k, metric: KnnMetric::Euclidean })
                .unwrap();
            assert!(a.is_symmetric(0.0));
            for i in 0..n {
                assert!(a.degree(i) >= k, "node {i} has degree {} < {k}", a.degree(i));
            }
        }
    }

    #[test]
    fn exact_ties_resolve_deterministically() {
        // three coincident points plus one far away; neighbor choice among
        // equals must prefer the lowest index
        let x = DenseMatrix::from_rows(&[
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![9.0, 9.0],
        ])
        .unwrap();
        let cfg = KnnConfig { k_prime: 1, metric: KnnMetric::Euclidean };
        let a = build_knn_graph(&x, &cfg).unwrap();
        let b = build_knn_graph(&x, &cfg).unwrap();
        assert_eq!(a, b);
        // node 1 and 2 both pick node 0; node 0 picks node 1; node 3 picks node 0
        assert_eq!(collect_edges(&a), vec![(0, 1), (0, 2), (0, 3)]);
    }

    #[test]
    fn cosine_metric_rejects_zero_rows() {
        let x = DenseMatrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let cfg = KnnConfig { k_prime: 1, metric: KnnMetric::Cosine };
        assert!(matches!(build_knn_graph(&x, &cfg), Err(AgcnError::Degenerate(_))));
    }
}
