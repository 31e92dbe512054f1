//! Cluster three Gaussian blobs with k-means++ and score the result.
//!
//! ```bash
//! cargo run -p agcn --example kmeans_blobs
//! ```

use agcn::kmeans::kmeans;
use agcn::matrix::DenseMatrix;
use agcn::metrics;
use agcn::rng::Rng;

fn main() {
    let mut rng = Rng::new(7);
    let centers = [(0.0, 0.0), (8.0, 0.0), (4.0, 7.0)];
    let per = 40;
    let mut rows = Vec::new();
    let mut truth = Vec::new();
    for (b, &(cx, cy)) in centers.iter().enumerate() {
        for _ in 0..per {
            rows.push(vec![cx + rng.normal(), cy + rng.normal()]);
            truth.push(b);
        }
    }
    let x = DenseMatrix::from_rows(&rows).unwrap();

    let result = kmeans(&x, 3, 0, 300).unwrap();
    println!("inertia: {:.2}", result.inertia);
    for j in 0..3 {
        println!("centroid {j}: {:?}", result.centroids.row(j));
    }
    let m = metrics::run_metrics(&truth, &result.labels).unwrap();
    println!(
        "ACC {:.3}  NMI {:.3}  ARI {:.3}  F1 {:.3}",
        m.acc, m.nmi, m.ari, m.f1
    );
}
