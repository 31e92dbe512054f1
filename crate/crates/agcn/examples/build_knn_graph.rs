//! Construct k'-nearest-neighbor graphs from raw features for a few k'
//! values and report their degree statistics.
//!
//! ```bash
//! cargo run -p agcn --example build_knn_graph
//! ```

use agcn::knn::{build_knn_graph, KnnConfig, KnnMetric};
use agcn::matrix::DenseMatrix;
use agcn::rng::Rng;

fn main() {
    let mut rng = Rng::new(3);
    let n = 100;
    let mut x = DenseMatrix::zeros(n, 4);
    for v in x.data_mut() {
        *v = rng.normal();
    }

    for k_prime in [1, 3, 5] {
        let cfg = KnnConfig {
            k_prime,
            metric: KnnMetric::Euclidean,
        };
        let graph = build_knn_graph(&x, &cfg).unwrap();
        let degrees: Vec<usize> = (0..n).map(|i| graph.degree(i)).collect();
        let min = degrees.iter().min().unwrap();
        let max = degrees.iter().max().unwrap();
        let mean = degrees.iter().sum::<usize>() as f64 / n as f64;
        println!(
            "k'={k_prime}: {} undirected edges, degree min {min} / mean {mean:.2} / max {max}",
            graph.nnz() / 2
        );
    }
}
