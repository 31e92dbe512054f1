//! Build a small graph, normalize it, and propagate features through it,
//! checking the sparse product against the dense oracle and showing the
//! touch counter that tracks the O(|E|·d) cost model.
//!
//! ```bash
//! cargo run -p agcn --example sparse_propagation
//! ```

use agcn::graph::{reset_spmm_touch_count, spmm_touch_count, SparseAdjacency};
use agcn::matrix::DenseMatrix;

fn main() {
    // a 6-node graph: two triangles joined by one bridge
    let edges = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)];
    let adj = SparseAdjacency::from_edges(6, &edges).unwrap();
    let norm = adj.normalize().unwrap();
    println!("adjacency: {} nodes, {} stored entries", adj.node_count(), adj.nnz());
    println!("normalized: {} stored entries (diagonal added)", norm.nnz());

    let mut x = DenseMatrix::zeros(6, 3);
    for (i, v) in x.data_mut().iter_mut().enumerate() {
        *v = (i as f64 * 0.7).sin();
    }

    reset_spmm_touch_count();
    let propagated = norm.spmm_dense(&x).unwrap();
    println!(
        "spmm touches: {} (= nnz {} x cols {})",
        spmm_touch_count(),
        norm.nnz(),
        x.cols()
    );

    let dense = norm.densify().matmul(&x).unwrap();
    println!(
        "max |sparse - dense| = {:.3e}",
        propagated.max_abs_diff(&dense)
    );

    for i in 0..3 {
        println!("row {i}: {:?} -> {:?}", x.row(i), propagated.row(i));
    }
}
