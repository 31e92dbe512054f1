//! Lloyd's algorithm with k-means++ seeding.
//!
//! Initializes the trainable cluster centroids from the pretrained
//! embedding, and doubles as a standalone clustering baseline. Fully
//! deterministic given `(data, k, seed)`: iteration stops at an exact
//! assignment fixpoint, with no floating-point tolerance in the loop.

use crate::error::{AgcnError, Result};
use crate::matrix::DenseMatrix;
use crate::rng::Rng;

#[derive(Clone, Debug)]
pub struct KmeansResult {
    /// k×d centroid matrix.
    pub centroids: DenseMatrix,
    /// Cluster index per sample.
    pub labels: Vec<usize>,
    /// Sum of squared distances of each sample to its centroid.
    pub inertia: f64,
}

pub fn kmeans(x: &DenseMatrix, k: usize, seed: u64, max_iters: usize) -> Result<KmeansResult> {
    let n = x.rows();
    let d = x.cols();
    if k == 0 {
        return Err(AgcnError::InvalidArgument("k must be at least 1".into()));
    }
    if k > n {
        return Err(AgcnError::InvalidArgument(format!(
            "k = {k} exceeds sample count {n}"
        )));
    }

    let mut rng = Rng::new(seed);
    let mut centroids = plus_plus_seed(x, k, &mut rng);
    let mut labels = vec![0usize; n];
    let mut prev_labels = vec![usize::MAX; n];

    for _ in 0..max_iters {
        for i in 0..n {
            labels[i] = nearest(x.row(i), &centroids).0;
        }
        fix_empty_clusters(x, &centroids, &mut labels, k);
        if labels == prev_labels {
            break;
        }
        prev_labels.copy_from_slice(&labels);

        let mut sums = DenseMatrix::zeros(k, d);
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[labels[i]] += 1;
            for (s, &v) in sums.row_mut(labels[i]).iter_mut().zip(x.row(i)) {
                *s += v;
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                let inv = 1.0 / counts[j] as f64;
                for s in sums.row_mut(j) {
                    *s *= inv;
                }
                centroids.row_mut(j).copy_from_slice(sums.row(j));
            }
        }
    }

    let inertia = (0..n).map(|i| nearest(x.row(i), &centroids).1).sum();
    Ok(KmeansResult {
        centroids,
        labels,
        inertia,
    })
}

/// k-means++: first center uniform, the rest sampled proportionally to the
/// squared distance from the nearest chosen center.
fn plus_plus_seed(x: &DenseMatrix, k: usize, rng: &mut Rng) -> DenseMatrix {
    let n = x.rows();
    let mut centroids = DenseMatrix::zeros(k, x.cols());
    let first = rng.index(n);
    centroids.row_mut(0).copy_from_slice(x.row(first));

    let mut dist_sq: Vec<f64> = (0..n)
        .map(|i| squared_distance(x.row(i), centroids.row(0)))
        .collect();
    for c in 1..k {
        let total: f64 = dist_sq.iter().sum();
        let chosen = if total > 0.0 {
            let mut target = rng.next_f64() * total;
            let mut pick = n - 1;
            for (i, &d) in dist_sq.iter().enumerate() {
                target -= d;
                if target <= 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            // all points coincide with chosen centers
            rng.index(n)
        };
        centroids.row_mut(c).copy_from_slice(x.row(chosen));
        for i in 0..n {
            let d = squared_distance(x.row(i), centroids.row(c));
            if d < dist_sq[i] {
                dist_sq[i] = d;
            }
        }
    }
    centroids
}

/// Re-seed each empty cluster to the point currently farthest from its own
/// centroid (first such point on index ties).
fn fix_empty_clusters(x: &DenseMatrix, centroids: &DenseMatrix, labels: &mut [usize], k: usize) {
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let mut far_idx = 0;
        let mut far_dist = -1.0;
        for i in 0..x.rows() {
            let d = squared_distance(x.row(i), centroids.row(labels[i]));
            if d > far_dist && counts[labels[i]] > 1 {
                far_dist = d;
                far_idx = i;
            }
        }
        labels[far_idx] = empty;
    }
}

fn nearest(point: &[f64], centroids: &DenseMatrix) -> (usize, f64) {
    let mut best = (0usize, f64::INFINITY);
    for j in 0..centroids.rows() {
        let d = squared_distance(point, centroids.row(j));
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
