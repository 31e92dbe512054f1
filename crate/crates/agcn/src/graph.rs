//! Sparse symmetric adjacency in compressed sparse row form.
//!
//! Stores the raw graph `A` and its propagation operator
//! `D^{-1/2}(A+I)D^{-1/2}`; every graph layer multiplies through
//! [`SparseAdjacency::spmm_dense`] so the cost stays proportional to the
//! number of stored edges rather than `n²`.

use std::cell::Cell;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{AgcnError, Result};
use crate::matrix::DenseMatrix;

thread_local! {
    // Counts (nonzero, output-column) pairs touched by spmm_dense on this
    // thread. Lets tests assert the O(|E|·d) cost model directly.
    static SPMM_TOUCHES: Cell<u64> = const { Cell::new(0) };
}

pub fn spmm_touch_count() -> u64 {
    SPMM_TOUCHES.with(Cell::get)
}

pub fn reset_spmm_touch_count() {
    SPMM_TOUCHES.with(|c| c.set(0));
}

/// Symmetric sparse matrix in CSR form. Immutable after construction, so it
/// can be shared freely across threads behind an `Arc`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseAdjacency {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseAdjacency {
    /// Build from an undirected edge list; each `(u, v)` is mirrored, and
    /// duplicates collapse. Self-loops are rejected: normalization injects
    /// them itself, so callers never double-add the identity.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(AgcnError::Validation(format!(
                    "edge ({u}, {v}) out of range for {n} nodes"
                )));
            }
            if u == v {
                return Err(AgcnError::Validation(format!("self-loop on node {u}")));
            }
            set.insert((u, v));
            set.insert((v, u));
        }
        let mut row_offsets = vec![0usize; n + 1];
        for &(u, _) in &set {
            row_offsets[u + 1] += 1;
        }
        for i in 0..n {
            row_offsets[i + 1] += row_offsets[i];
        }
        let col_indices: Vec<usize> = set.iter().map(|&(_, v)| v).collect();
        let values = vec![1.0; col_indices.len()];
        Ok(SparseAdjacency {
            n,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Assemble from raw CSR arrays. Validates structure (sorted unique
    /// columns per row, nonnegative values) but not symmetry; the operations
    /// that rely on symmetry check it themselves.
    pub fn from_raw_parts(
        n: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != n + 1 || row_offsets[0] != 0 {
            return Err(AgcnError::Validation("malformed row offsets".into()));
        }
        if col_indices.len() != values.len() || col_indices.len() != row_offsets[n] {
            return Err(AgcnError::Validation("CSR array lengths disagree".into()));
        }
        for i in 0..n {
            let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
            if lo > hi {
                return Err(AgcnError::Validation("row offsets not monotone".into()));
            }
            let cols = &col_indices[lo..hi];
            for w in cols.windows(2) {
                if w[0] >= w[1] {
                    return Err(AgcnError::Validation(format!(
                        "row {i}: columns not sorted/unique"
                    )));
                }
            }
            if cols.iter().any(|&c| c >= n) {
                return Err(AgcnError::Validation(format!("row {i}: column out of range")));
            }
        }
        if values.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(AgcnError::Validation("negative or non-finite value".into()));
        }
        Ok(SparseAdjacency {
            n,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    /// Stored entries of row `i` as `(column, value)` pairs.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
        self.col_indices[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row_offsets[i + 1] - self.row_offsets[i]
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                match self.get(j, i) {
                    Some(w) if (w - v).abs() <= tol => {}
                    _ => return false,
                }
            }
        }
        true
    }

    fn get(&self, i: usize, j: usize) -> Option<f64> {
        let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
        let cols = &self.col_indices[lo..hi];
        cols.binary_search(&j).ok().map(|pos| self.values[lo + pos])
    }

    pub fn densify(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                out.set(i, j, v);
            }
        }
        out
    }

    /// `D^{-1/2}(A+I)D^{-1/2}` with `D` the degree matrix of `A+I`.
    /// Self-loops are added here, so isolated nodes get degree 1 and the
    /// result is always well defined.
    pub fn normalize(&self) -> Result<SparseAdjacency> {
        if !self.is_symmetric(0.0) {
            return Err(AgcnError::Validation(
                "adjacency must be symmetric before normalization".into(),
            ));
        }
        let inv_sqrt_deg: Vec<f64> = (0..self.n)
            .map(|i| {
                let deg: f64 = 1.0 + self.row(i).map(|(_, v)| v).sum::<f64>();
                1.0 / deg.sqrt()
            })
            .collect();

        let mut row_offsets = Vec::with_capacity(self.n + 1);
        let mut col_indices = Vec::with_capacity(self.nnz() + self.n);
        let mut values = Vec::with_capacity(self.nnz() + self.n);
        row_offsets.push(0);
        for i in 0..self.n {
            let mut inserted_diag = false;
            for (j, v) in self.row(i) {
                if !inserted_diag && j > i {
                    col_indices.push(i);
                    values.push(inv_sqrt_deg[i] * inv_sqrt_deg[i]);
                    inserted_diag = true;
                }
                col_indices.push(j);
                values.push(v * inv_sqrt_deg[i] * inv_sqrt_deg[j]);
            }
            if !inserted_diag {
                col_indices.push(i);
                values.push(inv_sqrt_deg[i] * inv_sqrt_deg[i]);
            }
            row_offsets.push(col_indices.len());
        }
        Ok(SparseAdjacency {
            n: self.n,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Sparse-dense product `self · x`, touching each stored nonzero exactly
    /// once per output column.
    pub fn spmm_dense(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if self.n != x.rows() {
            return Err(AgcnError::ShapeMismatch {
                op: "spmm",
                lhs: format!("{}x{}", self.n, self.n),
                rhs: x.shape_str(),
            });
        }
        let cols = x.cols();
        let mut out = DenseMatrix::zeros(self.n, cols);
        let mut touches = 0u64;
        for i in 0..self.n {
            let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
            let out_row = out.row_mut(i);
            for idx in lo..hi {
                let j = self.col_indices[idx];
                let v = self.values[idx];
                let x_row = x.row(j);
                for (o, &xv) in out_row.iter_mut().zip(x_row) {
                    *o += v * xv;
                    touches += 1;
                }
            }
        }
        SPMM_TOUCHES.with(|c| c.set(c.get() + touches));
        Ok(out)
    }

    /// Render as the edge-list text format (each undirected edge once).
    pub fn to_edge_list_string(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            for (j, _) in self.row(i) {
                if i < j {
                    let _ = writeln!(out, "{i} {j}");
                }
            }
        }
        out
    }
}

/// Parse the edge-list text format: one `u v` pair per line (0-based ids,
/// whitespace-separated, each undirected edge listed once). Blank lines and
/// `#` comments are skipped. `n` fixes the node count; edges referencing
/// nodes `>= n` are validation errors.
pub fn parse_edge_list(text: &str, path: &str, n: usize) -> Result<SparseAdjacency> {
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let parse = |tok: Option<&str>, lineno: usize| -> Result<usize> {
            tok.ok_or_else(|| AgcnError::Parse {
                path: path.to_string(),
                line: lineno + 1,
                msg: "expected two node ids".into(),
            })?
            .parse::<usize>()
            .map_err(|e| AgcnError::Parse {
                path: path.to_string(),
                line: lineno + 1,
                msg: format!("bad node id: {e}"),
            })
        };
        let u = parse(it.next(), lineno)?;
        let v = parse(it.next(), lineno)?;
        if it.next().is_some() {
            return Err(AgcnError::Parse {
                path: path.to_string(),
                line: lineno + 1,
                msg: "trailing tokens after edge".into(),
            });
        }
        edges.push((u, v));
    }
    SparseAdjacency::from_edges(n, &edges)
}

pub fn load_edge_list(path: &Path, n: usize) -> Result<SparseAdjacency> {
    let text = std::fs::read_to_string(path)?;
    parse_edge_list(&text, &path.display().to_string(), n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_normalize_oracle(a: &SparseAdjacency) -> DenseMatrix {
        // Explicit D^{-1/2}(A+I)D^{-1/2} by dense construction.
        let n = a.node_count();
        let mut a_plus_i = a.densify();
        for i in 0..n {
            a_plus_i.set(i, i, a_plus_i.get(i, i) + 1.0);
        }
        let mut d_inv_sqrt = DenseMatrix::zeros(n, n);
        for i in 0..n {
            let deg: f64 = a_plus_i.row(i).iter().sum();
            d_inv_sqrt.set(i, i, 1.0 / deg.sqrt());
        }
        d_inv_sqrt
            .matmul(&a_plus_i)
            .unwrap()
            .matmul(&d_inv_sqrt)
            .unwrap()
    }

    #[test]
    fn empty_graph_normalizes_to_identity() {
        let a = SparseAdjacency::from_edges(3, &[]).unwrap();
        let norm = a.normalize().unwrap();
        assert_eq!(norm.densify(), DenseMatrix::identity(3));
    }

    #[test]
    fn single_edge_gives_half_everywhere() {
        let a = SparseAdjacency::from_edges(2, &[(0, 1)]).unwrap();
        let norm = a.normalize().unwrap().densify();
        for i in 0..2 {
            for j in 0..2 {
                assert!((norm.get(i, j) - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn path_graph_matches_dense_oracle() {
        let a = SparseAdjacency::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let norm = a.normalize().unwrap().densify();
        let oracle = dense_normalize_oracle(&a);
        assert!(norm.max_abs_diff(&oracle) < 1e-12);
    }

    #[test]
    fn normalization_structure_on_random_graphs() {
        let mut rng = crate::rng::Rng::new(5);
        for _ in 0..20 {
            let n = 3 + rng.index(10);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.next_f64() < 0.3 {
                        edges.push((u, v));
                    }
                }
            }
            let a = SparseAdjacency::from_edges(n, &edges).unwrap();
            let norm = a.normalize().unwrap();
            assert!(norm.is_symmetric(1e-12));
            assert!(norm.densify().max_abs_diff(&dense_normalize_oracle(&a)) < 1e-12);
            for i in 0..n {
                // diagonal is 1/deg(i); every entry lies in (0, 1]
                let deg = 1.0 + a.row(i).map(|(_, v)| v).sum::<f64>();
                let diag = norm.row(i).find(|&(j, _)| j == i).map(|(_, v)| v).unwrap();
                assert!((diag - 1.0 / deg).abs() < 1e-12);
                for (_, v) in norm.row(i) {
                    assert!(v > 0.0 && v <= 1.0 + 1e-12);
                }
                // rows sum to exactly 1 when all neighbors share the degree
                let shared = a.row(i).all(|(j, _)| {
                    (1.0 + a.row(j).map(|(_, w)| w).sum::<f64>() - deg).abs() == 0.0
                });
                if shared {
                    let sum: f64 = norm.row(i).map(|(_, v)| v).sum();
                    assert!((sum - 1.0).abs() < 1e-12, "row {i} sums to {sum}");
                }
            }
        }
    }

    #[test]
    fn regular_graph_rows_sum_to_one() {
        // 4-cycle: every neighbor shares the node's degree.
        let a = SparseAdjacency::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let norm = a.normalize().unwrap();
        for i in 0..4 {
            let sum: f64 = norm.row(i).map(|(_, v)| v).sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn asymmetric_input_rejected_by_normalize() {
        let a = SparseAdjacency::from_raw_parts(2, vec![0, 1, 1], vec![1], vec![1.0]).unwrap();
        assert!(matches!(a.normalize(), Err(AgcnError::Validation(_))));
    }

    #[test]
    fn spmm_identity_preserves_input() {
        let eye =
            SparseAdjacency::from_raw_parts(3, vec![0, 1, 2, 3], vec![0, 1, 2], vec![1.0; 3])
                .unwrap();
        let x = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        assert_eq!(eye.spmm_dense(&x).unwrap(), x);
    }

    #[test]
    fn spmm_matches_densified_multiplication() {
        let mut rng = crate::rng::Rng::new(9);
        for trial in 0..200 {
            let n = 2 + rng.index(63);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.next_f64() < 0.2 {
                        edges.push((u, v));
                    }
                }
            }
            let a = SparseAdjacency::from_edges(n, &edges).unwrap();
            let d = 1 + rng.index(6);
            let mut x = DenseMatrix::zeros(n, d);
            for v in x.data_mut() {
                *v = rng.uniform(-1.0, 1.0);
            }
            let sparse = a.spmm_dense(&x).unwrap();
            let dense = a.densify().matmul(&x).unwrap();
            assert!(
                sparse.max_abs_diff(&dense) < 1e-12,
                "trial {trial}: spmm diverges from dense product"
            );
        }
    }

    #[test]
    fn spmm_touch_counter_is_nnz_times_cols() {
        let a = SparseAdjacency::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]).unwrap();
        let x = DenseMatrix::filled(5, 7, 1.0);
        reset_spmm_touch_count();
        a.spmm_dense(&x).unwrap();
        assert_eq!(spmm_touch_count(), (a.nnz() * 7) as u64);
    }

    #[test]
    fn edge_list_round_trip() {
        let a = SparseAdjacency::from_edges(6, &[(0, 3), (1, 2), (4, 5), (0, 5)]).unwrap();
        let text = a.to_edge_list_string();
        let b = parse_edge_list(&text, "mem", 6).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_edge_list("0 1\n2 x\n", "g.txt", 4).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("g.txt:2"), "{msg}");
    }

    #[test]
    fn self_loop_rejected() {
        assert!(SparseAdjacency::from_edges(3, &[(1, 1)]).is_err());
    }
}
