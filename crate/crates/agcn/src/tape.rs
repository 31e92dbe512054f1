//! Reverse-mode automatic differentiation over dense matrices.
//!
//! A [`Tape`] records every operation of a forward pass as a node holding
//! its output value; [`Tape::backward`] replays the nodes in reverse,
//! accumulating vector-Jacobian products into each input. Nodes only ever
//! reference earlier nodes, so creation order is already a topological
//! order and the reverse sweep is a single linear pass.
//!
//! The tape is rebuilt from scratch for every training iteration; nothing
//! is retained across passes. One tape is single-writer, but disjoint tapes
//! are independent and may live on different threads.

use std::sync::Arc;

use crate::error::{AgcnError, Result};
use crate::graph::SparseAdjacency;
use crate::matrix::DenseMatrix;

/// Index of a node on its tape.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeId(usize);

#[derive(Clone)]
enum Op {
    Leaf,
    MatMul { a: NodeId, b: NodeId },
    Spmm { adj: Arc<SparseAdjacency>, x: NodeId },
    Add { a: NodeId, b: NodeId },
    /// Broadcast a 1×c bias over every row.
    BiasAdd { x: NodeId, bias: NodeId },
    Hadamard { a: NodeId, b: NodeId },
    /// Multiply row i of `x` by entry i of the n×1 vector `weights`.
    ScaleRows { x: NodeId, weights: NodeId },
    Relu { x: NodeId },
    LeakyRelu { x: NodeId, slope: f64 },
    SoftmaxRows { x: NodeId },
    /// Caches the input row norms for the backward rule.
    L2NormalizeRows { x: NodeId, norms: Vec<f64> },
    ConcatCols { parts: Vec<NodeId> },
    SliceCols { x: NodeId, start: usize, len: usize },
    FrobeniusSqLoss { a: NodeId, b: NodeId },
    /// Student's-t soft assignment of embeddings to centroids.
    /// Caches `t = 1 + d²/α` and the per-row normalizers.
    StudentT {
        embedding: NodeId,
        centroids: NodeId,
        alpha: f64,
        tdist: DenseMatrix,
        row_sums: Vec<f64>,
    },
    /// `λ_p·KL(target‖pred) + λ_s·KL(target‖soft)` with `target` a constant.
    KlPair {
        pred: NodeId,
        soft: NodeId,
        target: DenseMatrix,
        lambda_pred: f64,
        lambda_soft: f64,
    },
}

struct TapeNode {
    op: Op,
    value: DenseMatrix,
    grad: Option<DenseMatrix>,
    trainable: bool,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<TapeNode>,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, op: Op, value: DenseMatrix, trainable: bool) -> NodeId {
        self.nodes.push(TapeNode {
            op,
            value,
            grad: None,
            trainable,
        });
        NodeId(self.nodes.len() - 1)
    }

    /// Record a non-trainable leaf (input data, fixed matrices).
    pub fn constant(&mut self, value: DenseMatrix) -> NodeId {
        self.push(Op::Leaf, value, false)
    }

    /// Record a trainable leaf; `backward` will accumulate its gradient.
    pub fn parameter(&mut self, value: DenseMatrix) -> NodeId {
        self.push(Op::Leaf, value, true)
    }

    pub fn value(&self, id: NodeId) -> &DenseMatrix {
        &self.nodes[id.0].value
    }

    /// Gradient accumulated by the last `backward`, if any reached this node.
    pub fn grad(&self, id: NodeId) -> Option<&DenseMatrix> {
        self.nodes[id.0].grad.as_ref()
    }

    /// Gradient of a node, densified to zeros if nothing flowed to it.
    pub fn grad_or_zeros(&self, id: NodeId) -> DenseMatrix {
        let node = &self.nodes[id.0];
        node.grad
            .clone()
            .unwrap_or_else(|| DenseMatrix::zeros(node.value.rows(), node.value.cols()))
    }

    // ── Forward operations ───────────────────────────────────────────

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let value = self.value(a).matmul(self.value(b))?;
        Ok(self.push(Op::MatMul { a, b }, value, false))
    }

    pub fn spmm(&mut self, adj: &Arc<SparseAdjacency>, x: NodeId) -> Result<NodeId> {
        let value = adj.spmm_dense(self.value(x))?;
        Ok(self.push(
            Op::Spmm {
                adj: Arc::clone(adj),
                x,
            },
            value,
            false,
        ))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.shape() != vb.shape() {
            return Err(shape_err("add", va, vb));
        }
        let mut value = va.clone();
        value.add_assign(vb);
        Ok(self.push(Op::Add { a, b }, value, false))
    }

    pub fn bias_add(&mut self, x: NodeId, bias: NodeId) -> Result<NodeId> {
        let (vx, vb) = (self.value(x), self.value(bias));
        if vb.rows() != 1 || vb.cols() != vx.cols() {
            return Err(shape_err("bias_add", vx, vb));
        }
        let mut value = vx.clone();
        for i in 0..value.rows() {
            for (o, &bv) in value.row_mut(i).iter_mut().zip(vb.row(0)) {
                *o += bv;
            }
        }
        Ok(self.push(Op::BiasAdd { x, bias }, value, false))
    }

    pub fn hadamard(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.shape() != vb.shape() {
            return Err(shape_err("hadamard", va, vb));
        }
        let mut value = va.clone();
        for (o, &bv) in value.data_mut().iter_mut().zip(vb.data()) {
            *o *= bv;
        }
        Ok(self.push(Op::Hadamard { a, b }, value, false))
    }

    /// Per-row scalar weighting: row i of the output is `weights[i] · x[i]`.
    pub fn scale_rows(&mut self, x: NodeId, weights: NodeId) -> Result<NodeId> {
        let (vx, vw) = (self.value(x), self.value(weights));
        if vw.cols() != 1 || vw.rows() != vx.rows() {
            return Err(shape_err("scale_rows", vx, vw));
        }
        let mut value = vx.clone();
        for i in 0..value.rows() {
            let w = vw.get(i, 0);
            for o in value.row_mut(i) {
                *o *= w;
            }
        }
        Ok(self.push(Op::ScaleRows { x, weights }, value, false))
    }

    pub fn relu(&mut self, x: NodeId) -> NodeId {
        let value = self.value(x).map(|v| v.max(0.0));
        self.push(Op::Relu { x }, value, false)
    }

    pub fn leaky_relu(&mut self, x: NodeId, slope: f64) -> Result<NodeId> {
        if !(0.0..1.0).contains(&slope) || slope == 0.0 {
            return Err(AgcnError::InvalidArgument(format!(
                "leaky_relu slope must lie in (0, 1), got {slope}"
            )));
        }
        let value = self.value(x).map(|v| if v > 0.0 { v } else { slope * v });
        Ok(self.push(Op::LeakyRelu { x, slope }, value, false))
    }

    /// Row-wise softmax, stabilized by subtracting each row's maximum.
    pub fn softmax_rows(&mut self, x: NodeId) -> NodeId {
        let vx = self.value(x);
        let mut value = vx.clone();
        for i in 0..value.rows() {
            let row = value.row_mut(i);
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                sum += *v;
            }
            for v in row.iter_mut() {
                *v /= sum;
            }
        }
        self.push(Op::SoftmaxRows { x }, value, false)
    }

    pub fn l2_normalize_rows(&mut self, x: NodeId) -> Result<NodeId> {
        let vx = self.value(x);
        let mut norms = Vec::with_capacity(vx.rows());
        let mut value = vx.clone();
        for i in 0..value.rows() {
            let row = value.row_mut(i);
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(AgcnError::Degenerate(format!(
                    "l2_normalize_rows: row {i} has zero norm"
                )));
            }
            for v in row.iter_mut() {
                *v /= norm;
            }
            norms.push(norm);
        }
        Ok(self.push(Op::L2NormalizeRows { x, norms }, value, false))
    }

    /// Column-blockwise concatenation, left-to-right order preserved.
    pub fn concat_cols(&mut self, parts: &[NodeId]) -> Result<NodeId> {
        let values: Vec<&DenseMatrix> = parts.iter().map(|&p| self.value(p)).collect();
        let value = DenseMatrix::hstack(&values)?;
        Ok(self.push(
            Op::ConcatCols {
                parts: parts.to_vec(),
            },
            value,
            false,
        ))
    }

    pub fn slice_cols(&mut self, x: NodeId, start: usize, len: usize) -> Result<NodeId> {
        let vx = self.value(x);
        if start + len > vx.cols() {
            return Err(AgcnError::InvalidArgument(format!(
                "slice_cols {start}..{} out of range for {}",
                start + len,
                vx.shape_str()
            )));
        }
        let value = vx.slice_cols(start, len);
        Ok(self.push(Op::SliceCols { x, start, len }, value, false))
    }

    /// Squared Frobenius distance `‖a − b‖²_F` as a 1×1 node. No averaging.
    pub fn frobenius_sq_loss(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.shape() != vb.shape() {
            return Err(shape_err("frobenius_sq_loss", va, vb));
        }
        let loss: f64 = va
            .data()
            .iter()
            .zip(vb.data())
            .map(|(x, y)| (x - y) * (x - y))
            .sum();
        let value = DenseMatrix::new(1, 1, vec![loss]).expect("1x1");
        Ok(self.push(Op::FrobeniusSqLoss { a, b }, value, false))
    }

    /// Soft assignment `q_ij ∝ (1 + ‖h_i − μ_j‖²/α)^{-(α+1)/2}`, rows
    /// normalized to sum to one.
    pub fn student_t_assignment(
        &mut self,
        embedding: NodeId,
        centroids: NodeId,
        alpha: f64,
    ) -> Result<NodeId> {
        if alpha <= 0.0 {
            return Err(AgcnError::InvalidArgument(format!(
                "student-t dof must be positive, got {alpha}"
            )));
        }
        let (h, mu) = (self.value(embedding), self.value(centroids));
        if h.cols() != mu.cols() {
            return Err(shape_err("student_t_assignment", h, mu));
        }
        let (n, k) = (h.rows(), mu.rows());
        let exponent = -(alpha + 1.0) / 2.0;
        let mut tdist = DenseMatrix::zeros(n, k);
        let mut value = DenseMatrix::zeros(n, k);
        let mut row_sums = Vec::with_capacity(n);
        for i in 0..n {
            let hi = h.row(i);
            let mut sum = 0.0;
            for j in 0..k {
                let d2: f64 = hi
                    .iter()
                    .zip(mu.row(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                let t = 1.0 + d2 / alpha;
                let w = t.powf(exponent);
                tdist.set(i, j, t);
                value.set(i, j, w);
                sum += w;
            }
            for j in 0..k {
                value.set(i, j, value.get(i, j) / sum);
            }
            row_sums.push(sum);
        }
        Ok(self.push(
            Op::StudentT {
                embedding,
                centroids,
                alpha,
                tdist,
                row_sums,
            },
            value,
            false,
        ))
    }

    /// `λ_p · KL(target ‖ pred) + λ_s · KL(target ‖ soft)` as a 1×1 node.
    /// `target` is a constant: no gradient flows through it. Terms with a
    /// zero target entry contribute zero (the 0·log 0 convention).
    pub fn kl_pair_loss(
        &mut self,
        pred: NodeId,
        soft: NodeId,
        target: &DenseMatrix,
        lambda_pred: f64,
        lambda_soft: f64,
    ) -> Result<NodeId> {
        let (vp, vq) = (self.value(pred), self.value(soft));
        if vp.shape() != target.shape() {
            return Err(shape_err("kl_pair_loss(pred)", vp, target));
        }
        if vq.shape() != target.shape() {
            return Err(shape_err("kl_pair_loss(soft)", vq, target));
        }
        if lambda_pred < 0.0 || lambda_soft < 0.0 {
            return Err(AgcnError::InvalidArgument(
                "KL loss weights must be nonnegative".into(),
            ));
        }
        let mut kl_pred = 0.0;
        let mut kl_soft = 0.0;
        for idx in 0..target.data().len() {
            let p = target.data()[idx];
            if p <= 0.0 {
                continue;
            }
            let z = vp.data()[idx];
            let q = vq.data()[idx];
            if z <= 0.0 || q <= 0.0 {
                return Err(AgcnError::Degenerate(
                    "kl_pair_loss: nonpositive probability under positive target".into(),
                ));
            }
            kl_pred += p * (p / z).ln();
            kl_soft += p * (p / q).ln();
        }
        let loss = lambda_pred * kl_pred + lambda_soft * kl_soft;
        let value = DenseMatrix::new(1, 1, vec![loss]).expect("1x1");
        Ok(self.push(
            Op::KlPair {
                pred,
                soft,
                target: target.clone(),
                lambda_pred,
                lambda_soft,
            },
            value,
            false,
        ))
    }

    // ── Backward pass ────────────────────────────────────────────────

    /// Reverse sweep from a scalar loss node. Every trainable leaf that the
    /// loss depends on receives its accumulated gradient; untouched leaves
    /// read back as zero via [`Tape::grad_or_zeros`].
    pub fn backward(&mut self, loss: NodeId) -> Result<()> {
        if !self.value(loss).is_scalar() {
            return Err(AgcnError::InvalidArgument(format!(
                "backward requires a scalar loss node, got {}",
                self.value(loss).shape_str()
            )));
        }
        for node in &mut self.nodes {
            node.grad = None;
        }
        self.nodes[loss.0].grad = Some(DenseMatrix::filled(1, 1, 1.0));

        for idx in (0..self.nodes.len()).rev() {
            let Some(g) = self.nodes[idx].grad.clone() else {
                continue;
            };
            let op = self.nodes[idx].op.clone();
            match op {
                Op::Leaf => {}
                Op::MatMul { a, b } => {
                    let da = g.matmul_transpose_b(self.value(b))?;
                    let db = self.value(a).matmul_transpose_a(&g)?;
                    self.accumulate(a, da);
                    self.accumulate(b, db);
                }
                Op::Spmm { adj, x } => {
                    // adjacency is symmetric, so sᵀ·g = s·g
                    let dx = adj.spmm_dense(&g)?;
                    self.accumulate(x, dx);
                }
                Op::Add { a, b } => {
                    self.accumulate(a, g.clone());
                    self.accumulate(b, g);
                }
                Op::BiasAdd { x, bias } => {
                    let mut db = DenseMatrix::zeros(1, g.cols());
                    for i in 0..g.rows() {
                        for (o, &gv) in db.row_mut(0).iter_mut().zip(g.row(i)) {
                            *o += gv;
                        }
                    }
                    self.accumulate(x, g);
                    self.accumulate(bias, db);
                }
                Op::Hadamard { a, b } => {
                    let mut da = g.clone();
                    for (o, &bv) in da.data_mut().iter_mut().zip(self.value(b).data()) {
                        *o *= bv;
                    }
                    let mut db = g;
                    for (o, &av) in db.data_mut().iter_mut().zip(self.value(a).data()) {
                        *o *= av;
                    }
                    self.accumulate(a, da);
                    self.accumulate(b, db);
                }
                Op::ScaleRows { x, weights } => {
                    let vx = self.value(x);
                    let vw = self.value(weights);
                    let mut dx = g.clone();
                    let mut dw = DenseMatrix::zeros(vw.rows(), 1);
                    for i in 0..g.rows() {
                        let w = vw.get(i, 0);
                        let mut dot = 0.0;
                        for (dv, &xv) in dx.row_mut(i).iter_mut().zip(vx.row(i)) {
                            dot += *dv * xv;
                            *dv *= w;
                        }
                        dw.set(i, 0, dot);
                    }
                    self.accumulate(x, dx);
                    self.accumulate(weights, dw);
                }
                Op::Relu { x } => {
                    let mut dx = g;
                    for (dv, &xv) in dx.data_mut().iter_mut().zip(self.value(x).data()) {
                        if xv <= 0.0 {
                            *dv = 0.0;
                        }
                    }
                    self.accumulate(x, dx);
                }
                Op::LeakyRelu { x, slope } => {
                    let mut dx = g;
                    for (dv, &xv) in dx.data_mut().iter_mut().zip(self.value(x).data()) {
                        if xv <= 0.0 {
                            *dv *= slope;
                        }
                    }
                    self.accumulate(x, dx);
                }
                Op::SoftmaxRows { x } => {
                    let y = &self.nodes[idx].value;
                    let mut dx = g.clone();
                    for i in 0..dx.rows() {
                        let y_row = y.row(i);
                        let dot: f64 = y_row.iter().zip(g.row(i)).map(|(a, b)| a * b).sum();
                        for (dv, &yv) in dx.row_mut(i).iter_mut().zip(y_row) {
                            *dv = yv * (*dv - dot);
                        }
                    }
                    self.accumulate(x, dx);
                }
                Op::L2NormalizeRows { x, norms } => {
                    let y = &self.nodes[idx].value;
                    let mut dx = g.clone();
                    for i in 0..dx.rows() {
                        let y_row = y.row(i);
                        let dot: f64 = y_row.iter().zip(g.row(i)).map(|(a, b)| a * b).sum();
                        let inv_norm = 1.0 / norms[i];
                        for (dv, &yv) in dx.row_mut(i).iter_mut().zip(y_row) {
                            *dv = (*dv - dot * yv) * inv_norm;
                        }
                    }
                    self.accumulate(x, dx);
                }
                Op::ConcatCols { parts } => {
                    let mut offset = 0;
                    for part in parts {
                        let width = self.value(part).cols();
                        let dp = g.slice_cols(offset, width);
                        offset += width;
                        self.accumulate(part, dp);
                    }
                }
                Op::SliceCols { x, start, len } => {
                    let vx = self.value(x);
                    let mut dx = DenseMatrix::zeros(vx.rows(), vx.cols());
                    for i in 0..g.rows() {
                        dx.row_mut(i)[start..start + len].copy_from_slice(g.row(i));
                    }
                    self.accumulate(x, dx);
                }
                Op::FrobeniusSqLoss { a, b } => {
                    let scale = 2.0 * g.get(0, 0);
                    let (va, vb) = (self.value(a), self.value(b));
                    let mut da = va.clone();
                    for (dv, &bv) in da.data_mut().iter_mut().zip(vb.data()) {
                        *dv = scale * (*dv - bv);
                    }
                    let db = da.map(|v| -v);
                    self.accumulate(a, da);
                    self.accumulate(b, db);
                }
                Op::StudentT {
                    embedding,
                    centroids,
                    alpha,
                    tdist,
                    row_sums,
                } => {
                    let q = &self.nodes[idx].value;
                    let h = self.value(embedding);
                    let mu = self.value(centroids);
                    let (n, k) = q.shape();
                    let coeff = -(alpha + 1.0) / (2.0 * alpha);
                    let mut dh = DenseMatrix::zeros(n, h.cols());
                    let mut dmu = DenseMatrix::zeros(k, mu.cols());
                    for i in 0..n {
                        let g_row = g.row(i);
                        let q_row = q.row(i);
                        let dot: f64 = g_row.iter().zip(q_row).map(|(a, b)| a * b).sum();
                        let inv_sum = 1.0 / row_sums[i];
                        for j in 0..k {
                            // d loss / d (unnormalized weight w_ij)
                            let dw = (g_row[j] - dot) * inv_sum;
                            // w_ij = q_ij * S_i; dw/dt = coeff * w / t
                            let dd = dw * coeff * q_row[j] * row_sums[i] / tdist.get(i, j);
                            let two_dd = 2.0 * dd;
                            for c in 0..h.cols() {
                                let diff = h.get(i, c) - mu.get(j, c);
                                dh.set(i, c, dh.get(i, c) + two_dd * diff);
                                dmu.set(j, c, dmu.get(j, c) - two_dd * diff);
                            }
                        }
                    }
                    self.accumulate(embedding, dh);
                    self.accumulate(centroids, dmu);
                }
                Op::KlPair {
                    pred,
                    soft,
                    target,
                    lambda_pred,
                    lambda_soft,
                } => {
                    let scale = g.get(0, 0);
                    let (vp, vq) = (self.value(pred), self.value(soft));
                    let mut dp = DenseMatrix::zeros(vp.rows(), vp.cols());
                    let mut dq = DenseMatrix::zeros(vq.rows(), vq.cols());
                    for idx2 in 0..target.data().len() {
                        let p = target.data()[idx2];
                        if p <= 0.0 {
                            continue;
                        }
                        dp.data_mut()[idx2] = -scale * lambda_pred * p / vp.data()[idx2];
                        dq.data_mut()[idx2] = -scale * lambda_soft * p / vq.data()[idx2];
                    }
                    self.accumulate(pred, dp);
                    self.accumulate(soft, dq);
                }
            }
        }
        Ok(())
    }

    fn accumulate(&mut self, id: NodeId, delta: DenseMatrix) {
        let node = &mut self.nodes[id.0];
        // Gradients of non-parameter leaves are never read; skip them.
        if matches!(node.op, Op::Leaf) && !node.trainable {
            return;
        }
        match &mut node.grad {
            Some(g) => g.add_assign(&delta),
            slot @ None => *slot = Some(delta),
        }
    }
}

fn shape_err(op: &'static str, lhs: &DenseMatrix, rhs: &DenseMatrix) -> AgcnError {
    AgcnError::ShapeMismatch {
        op,
        lhs: lhs.shape_str(),
        rhs: rhs.shape_str(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradcheck::{fd_grad, max_rel_err};
    use crate::rng::Rng;

    fn random_matrix(rng: &mut Rng, rows: usize, cols: usize) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(rows, cols);
        for v in m.data_mut() {
            *v = rng.uniform(-1.0, 1.0);
        }
        m
    }

    /// Sum of all entries of a node, expressed as 1ᵀ · x · 1 on the tape so
    /// it stays a scalar node without a dedicated reduction op.
    fn sum_node(tape: &mut Tape, x: NodeId) -> NodeId {
        let (r, c) = tape.value(x).shape();
        let left = tape.constant(DenseMatrix::filled(1, r, 1.0));
        let right = tape.constant(DenseMatrix::filled(c, 1, 1.0));
        let xs = tape.matmul(left, x).unwrap();
        tape.matmul(xs, right).unwrap()
    }

    #[test]
    fn matmul_identity_case() {
        let mut tape = Tape::new();
        let eye = tape.constant(DenseMatrix::identity(2));
        let m = tape.constant(
            DenseMatrix::from_rows(&[vec![1.0, -2.0], vec![0.5, 4.0]]).unwrap(),
        );
        let out = tape.matmul(eye, m).unwrap();
        assert_eq!(tape.value(out), tape.value(m));
    }

    #[test]
    fn matmul_hand_sum() {
        let mut tape = Tape::new();
        let a = tape.constant(DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap());
        let b = tape.constant(DenseMatrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap());
        let out = tape.matmul(a, b).unwrap();
        assert_eq!(tape.value(out).data(), &[3.0, 7.0]);
    }

    #[test]
    fn matmul_gradient_matches_finite_difference() {
        let a0 = DenseMatrix::identity(2);
        let b0 = DenseMatrix::from_rows(&[vec![2.0, 3.0], vec![4.0, 5.0]]).unwrap();
        let loss_at = |a: &DenseMatrix| {
            let mut tape = Tape::new();
            let a = tape.parameter(a.clone());
            let b = tape.constant(b0.clone());
            let prod = tape.matmul(a, b).unwrap();
            let s = sum_node(&mut tape, prod);
            tape.value(s).get(0, 0)
        };
        let numeric = fd_grad(loss_at, &a0, 1e-5);

        let mut tape = Tape::new();
        let a = tape.parameter(a0.clone());
        let b = tape.constant(b0);
        let prod = tape.matmul(a, b).unwrap();
        let s = sum_node(&mut tape, prod);
        tape.backward(s).unwrap();
        let analytic = tape.grad_or_zeros(a);
        assert!(max_rel_err(&analytic, &numeric) < 1e-6);
    }

    #[test]
    fn leaky_relu_values() {
        let mut tape = Tape::new();
        let x = tape.constant(DenseMatrix::from_rows(&[vec![3.0, -5.0]]).unwrap());
        let y = tape.leaky_relu(x, 0.2).unwrap();
        assert_eq!(tape.value(y).data(), &[3.0, -1.0]);
        assert!(tape.leaky_relu(x, 0.0).is_err());
        assert!(tape.leaky_relu(x, 1.0).is_err());
    }

    #[test]
    fn leaky_relu_gradient_at_negative_input() {
        let x0 = DenseMatrix::from_rows(&[vec![-2.0]]).unwrap();
        let loss_at = |x: &DenseMatrix| {
            let mut tape = Tape::new();
            let x = tape.parameter(x.clone());
            let y = tape.leaky_relu(x, 0.2).unwrap();
            tape.value(y).get(0, 0)
        };
        let numeric = fd_grad(loss_at, &x0, 1e-5);
        assert!((numeric.get(0, 0) - 0.2).abs() < 1e-7);

        let mut tape = Tape::new();
        let x = tape.parameter(x0);
        let y = tape.leaky_relu(x, 0.2).unwrap();
        tape.backward(y).unwrap();
        assert!((tape.grad_or_zeros(x).get(0, 0) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn relu_values_and_zeroing() {
        let mut tape = Tape::new();
        let x = tape.constant(DenseMatrix::from_rows(&[vec![-1.0, 0.0, 2.0]]).unwrap());
        let y = tape.relu(x);
        assert_eq!(tape.value(y).data(), &[0.0, 0.0, 2.0]);
        let neg = tape.constant(DenseMatrix::filled(2, 2, -3.5));
        let y = tape.relu(neg);
        assert_eq!(tape.value(y).data(), &[0.0; 4]);
    }

    #[test]
    fn softmax_symmetry_and_stability() {
        let mut tape = Tape::new();
        let x = tape.constant(DenseMatrix::from_rows(&[vec![0.0, 0.0]]).unwrap());
        let y = tape.softmax_rows(x);
        assert_eq!(tape.value(y).data(), &[0.5, 0.5]);

        let big = tape.constant(DenseMatrix::from_rows(&[vec![1000.0, 0.0]]).unwrap());
        let y = tape.softmax_rows(big);
        let row = tape.value(y).row(0);
        assert!(row.iter().all(|v| v.is_finite()));
        assert!((row[0] - 1.0).abs() < 1e-12 && row[1] < 1e-12);
    }

    #[test]
    fn l2_normalize_hand_cases_and_zero_row() {
        let mut tape = Tape::new();
        let x = tape.constant(DenseMatrix::from_rows(&[vec![0.5, 0.5], vec![3.0, 4.0]]).unwrap());
        let y = tape.l2_normalize_rows(x).unwrap();
        let v = tape.value(y);
        let inv_sqrt2 = 1.0 / 2f64.sqrt();
        assert!((v.get(0, 0) - inv_sqrt2).abs() < 1e-15);
        assert!((v.get(1, 0) - 0.6).abs() < 1e-15);
        assert!((v.get(1, 1) - 0.8).abs() < 1e-15);

        let zero = tape.constant(DenseMatrix::zeros(1, 2));
        assert!(matches!(
            tape.l2_normalize_rows(zero),
            Err(AgcnError::Degenerate(_))
        ));
    }

    #[test]
    fn concat_preserves_blocks_and_splits_gradient() {
        let mut rng = Rng::new(21);
        let a0 = random_matrix(&mut rng, 3, 2);
        let b0 = random_matrix(&mut rng, 3, 3);

        let mut tape = Tape::new();
        let a = tape.parameter(a0.clone());
        let b = tape.parameter(b0.clone());
        let cat = tape.concat_cols(&[a, b]).unwrap();
        assert_eq!(tape.value(cat).shape(), (3, 5));
        assert_eq!(tape.value(cat).slice_cols(0, 2), a0);
        assert_eq!(tape.value(cat).slice_cols(2, 3), b0);

        let s = sum_node(&mut tape, cat);
        tape.backward(s).unwrap();
        assert_eq!(tape.grad_or_zeros(a), DenseMatrix::filled(3, 2, 1.0));
        assert_eq!(tape.grad_or_zeros(b), DenseMatrix::filled(3, 3, 1.0));

        // single-part concat is the identity
        let mut tape = Tape::new();
        let a = tape.constant(a0.clone());
        let cat = tape.concat_cols(&[a]).unwrap();
        assert_eq!(tape.value(cat), &a0);
    }

    #[test]
    fn scale_rows_identity_and_zero() {
        let mut rng = Rng::new(4);
        let z0 = random_matrix(&mut rng, 4, 3);
        let mut tape = Tape::new();
        let z = tape.constant(z0.clone());
        let ones = tape.constant(DenseMatrix::filled(4, 1, 1.0));
        let out = tape.scale_rows(z, ones).unwrap();
        assert_eq!(tape.value(out), &z0);
        let zeros = tape.constant(DenseMatrix::zeros(4, 1));
        let out = tape.scale_rows(z, zeros).unwrap();
        assert_eq!(tape.value(out), &DenseMatrix::zeros(4, 3));
    }

    #[test]
    fn elementwise_ops_gradients_match_finite_difference() {
        let mut rng = Rng::new(13);
        let a0 = random_matrix(&mut rng, 3, 4);
        let b0 = random_matrix(&mut rng, 3, 4);
        let w0 = random_matrix(&mut rng, 3, 1);

        // hadamard + add + scale_rows + relu + leaky + softmax + l2norm in one graph
        let build = |a: &DenseMatrix, b: &DenseMatrix, w: &DenseMatrix| {
            let mut tape = Tape::new();
            let an = tape.parameter(a.clone());
            let bn = tape.parameter(b.clone());
            let wn = tape.parameter(w.clone());
            let had = tape.hadamard(an, bn).unwrap();
            let summed = tape.add(had, an).unwrap();
            let scaled = tape.scale_rows(summed, wn).unwrap();
            let lrelu = tape.leaky_relu(scaled, 0.2).unwrap();
            let soft = tape.softmax_rows(lrelu);
            let l2 = tape.l2_normalize_rows(soft).unwrap();
            let relu = tape.relu(l2);
            let loss = sum_node(&mut tape, relu);
            (tape, an, bn, wn, loss)
        };

        let (mut tape, an, bn, wn, loss) = build(&a0, &b0, &w0);
        tape.backward(loss).unwrap();
        let (da, db, dw) = (
            tape.grad_or_zeros(an),
            tape.grad_or_zeros(bn),
            tape.grad_or_zeros(wn),
        );

        let num_a = fd_grad(
            |a| {
                let (t, _, _, _, l) = build(a, &b0, &w0);
                t.value(l).get(0, 0)
            },
            &a0,
            1e-5,
        );
        let num_b = fd_grad(
            |b| {
                let (t, _, _, _, l) = build(&a0, b, &w0);
                t.value(l).get(0, 0)
            },
            &b0,
            1e-5,
        );
        let num_w = fd_grad(
            |w| {
                let (t, _, _, _, l) = build(&a0, &b0, w);
                t.value(l).get(0, 0)
            },
            &w0,
            1e-5,
        );
        assert!(max_rel_err(&da, &num_a) < 1e-4);
        assert!(max_rel_err(&db, &num_b) < 1e-4);
        assert!(max_rel_err(&dw, &num_w) < 1e-4);
    }

    #[test]
    fn bias_add_gradient_is_column_sum() {
        let mut rng = Rng::new(17);
        let x0 = random_matrix(&mut rng, 5, 3);
        let b0 = random_matrix(&mut rng, 1, 3);
        let mut tape = Tape::new();
        let x = tape.parameter(x0);
        let b = tape.parameter(b0);
        let y = tape.bias_add(x, b).unwrap();
        let loss = sum_node(&mut tape, y);
        tape.backward(loss).unwrap();
        assert_eq!(tape.grad_or_zeros(b), DenseMatrix::filled(1, 3, 5.0));
        assert_eq!(tape.grad_or_zeros(x), DenseMatrix::filled(5, 3, 1.0));
    }

    #[test]
    fn frobenius_loss_values_and_gradient() {
        let mut tape = Tape::new();
        let a = tape.constant(DenseMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap());
        let same = tape.frobenius_sq_loss(a, a).unwrap();
        assert_eq!(tape.value(same).get(0, 0), 0.0);
        let b = tape.constant(DenseMatrix::zeros(1, 2));
        let loss = tape.frobenius_sq_loss(a, b).unwrap();
        assert_eq!(tape.value(loss).get(0, 0), 5.0);

        let mut rng = Rng::new(2);
        let a0 = random_matrix(&mut rng, 3, 2);
        let b0 = random_matrix(&mut rng, 3, 2);
        let mut tape = Tape::new();
        let an = tape.parameter(a0.clone());
        let bn = tape.constant(b0.clone());
        let loss = tape.frobenius_sq_loss(an, bn).unwrap();
        tape.backward(loss).unwrap();
        let analytic = tape.grad_or_zeros(an);
        // closed form 2(a-b)
        let mut expected = a0.clone();
        for (e, &bv) in expected.data_mut().iter_mut().zip(b0.data()) {
            *e = 2.0 * (*e - bv);
        }
        assert!(analytic.max_abs_diff(&expected) < 1e-12);
        let numeric = fd_grad(
            |a| {
                let mut t = Tape::new();
                let an = t.parameter(a.clone());
                let bn = t.constant(b0.clone());
                let l = t.frobenius_sq_loss(an, bn).unwrap();
                t.value(l).get(0, 0)
            },
            &a0,
            1e-5,
        );
        assert!(max_rel_err(&analytic, &numeric) < 1e-6);
    }

    #[test]
    fn spmm_gradient_matches_finite_difference() {
        let mut rng = Rng::new(31);
        let adj = Arc::new(
            SparseAdjacency::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 4)])
                .unwrap()
                .normalize()
                .unwrap(),
        );
        let x0 = random_matrix(&mut rng, 5, 3);
        let mut tape = Tape::new();
        let x = tape.parameter(x0.clone());
        let y = tape.spmm(&adj, x).unwrap();
        let loss = sum_node(&mut tape, y);
        tape.backward(loss).unwrap();
        let analytic = tape.grad_or_zeros(x);
        let adj2 = Arc::clone(&adj);
        let numeric = fd_grad(
            |x| {
                let mut t = Tape::new();
                let xn = t.parameter(x.clone());
                let y = t.spmm(&adj2, xn).unwrap();
                let l = sum_node(&mut t, y);
                t.value(l).get(0, 0)
            },
            &x0,
            1e-5,
        );
        assert!(max_rel_err(&analytic, &numeric) < 1e-6);
    }

    #[test]
    fn backward_of_sum_gives_ones_and_unused_param_zero() {
        let mut tape = Tape::new();
        let p = tape.parameter(DenseMatrix::filled(2, 3, 0.7));
        let unused = tape.parameter(DenseMatrix::filled(4, 1, 1.0));
        let loss = sum_node(&mut tape, p);
        tape.backward(loss).unwrap();
        assert_eq!(tape.grad_or_zeros(p), DenseMatrix::filled(2, 3, 1.0));
        assert!(tape.grad(unused).is_none());
        assert_eq!(tape.grad_or_zeros(unused), DenseMatrix::zeros(4, 1));
    }

    #[test]
    fn backward_rejects_non_scalar_loss() {
        let mut tape = Tape::new();
        let p = tape.parameter(DenseMatrix::zeros(2, 2));
        assert!(tape.backward(p).is_err());
    }

    #[test]
    fn backward_is_bitwise_deterministic() {
        let run = || {
            let mut rng = Rng::new(77);
            let a0 = random_matrix(&mut rng, 4, 4);
            let b0 = random_matrix(&mut rng, 4, 4);
            let mut tape = Tape::new();
            let a = tape.parameter(a0);
            let b = tape.parameter(b0);
            let prod = tape.matmul(a, b).unwrap();
            let soft = tape.softmax_rows(prod);
            let loss = tape.frobenius_sq_loss(soft, b).unwrap();
            tape.backward(loss).unwrap();
            (tape.grad_or_zeros(a), tape.grad_or_zeros(b))
        };
        let (da1, db1) = run();
        let (da2, db2) = run();
        let bits = |m: &DenseMatrix| m.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&da1), bits(&da2));
        assert_eq!(bits(&db1), bits(&db2));
    }

    #[test]
    fn student_t_gradient_matches_finite_difference() {
        let mut rng = Rng::new(19);
        let h0 = random_matrix(&mut rng, 4, 3);
        let mu0 = random_matrix(&mut rng, 2, 3);
        let probe = random_matrix(&mut rng, 4, 2);

        let build = |h: &DenseMatrix, mu: &DenseMatrix| {
            let mut tape = Tape::new();
            let hn = tape.parameter(h.clone());
            let mn = tape.parameter(mu.clone());
            let q = tape.student_t_assignment(hn, mn, 1.0).unwrap();
            let pr = tape.constant(probe.clone());
            let weighted = tape.hadamard(q, pr).unwrap();
            let loss = sum_node(&mut tape, weighted);
            (tape, hn, mn, loss)
        };
        let (mut tape, hn, mn, loss) = build(&h0, &mu0);
        tape.backward(loss).unwrap();
        let (dh, dmu) = (tape.grad_or_zeros(hn), tape.grad_or_zeros(mn));
        let num_h = fd_grad(
            |h| {
                let (t, _, _, l) = build(h, &mu0);
                t.value(l).get(0, 0)
            },
            &h0,
            1e-5,
        );
        let num_mu = fd_grad(
            |mu| {
                let (t, _, _, l) = build(&h0, mu);
                t.value(l).get(0, 0)
            },
            &mu0,
            1e-5,
        );
        assert!(max_rel_err(&dh, &num_h) < 1e-4, "{}", max_rel_err(&dh, &num_h));
        assert!(max_rel_err(&dmu, &num_mu) < 1e-4);
    }

    #[test]
    fn kl_pair_loss_values_and_gradient() {
        // p == z == q gives zero loss
        let p = DenseMatrix::from_rows(&[vec![0.3, 0.7]]).unwrap();
        let mut tape = Tape::new();
        let z = tape.constant(p.clone());
        let q = tape.constant(p.clone());
        let loss = tape.kl_pair_loss(z, q, &p, 1.0, 1.0).unwrap();
        assert!(tape.value(loss).get(0, 0).abs() < 1e-15);

        // plug-in: p=[1,0], z=q=[0.5,0.5] -> 2 ln 2
        let p = DenseMatrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let half = DenseMatrix::from_rows(&[vec![0.5, 0.5]]).unwrap();
        let mut tape = Tape::new();
        let z = tape.constant(half.clone());
        let q = tape.constant(half.clone());
        let loss = tape.kl_pair_loss(z, q, &p, 1.0, 1.0).unwrap();
        assert!((tape.value(loss).get(0, 0) - 2.0 * 2f64.ln()).abs() < 1e-12);

        // zero weights give zero loss
        let mut tape = Tape::new();
        let z = tape.constant(half.clone());
        let q = tape.constant(half.clone());
        let loss = tape.kl_pair_loss(z, q, &p, 0.0, 0.0).unwrap();
        assert_eq!(tape.value(loss).get(0, 0), 0.0);

        // gradient against finite differences through a softmax parameterization
        let mut rng = Rng::new(23);
        let logits0 = random_matrix(&mut rng, 3, 4);
        let target = {
            let mut t = DenseMatrix::zeros(3, 4);
            for i in 0..3 {
                t.set(i, i % 4, 1.0);
            }
            t
        };
        let build = |logits: &DenseMatrix| {
            let mut tape = Tape::new();
            let ln = tape.parameter(logits.clone());
            let z = tape.softmax_rows(ln);
            let q = tape.softmax_rows(ln);
            let loss = tape.kl_pair_loss(z, q, &target, 0.7, 0.3).unwrap();
            (tape, ln, loss)
        };
        let (mut tape, ln, loss) = build(&logits0);
        tape.backward(loss).unwrap();
        let analytic = tape.grad_or_zeros(ln);
        let numeric = fd_grad(
            |l| {
                let (t, _, lo) = build(l);
                t.value(lo).get(0, 0)
            },
            &logits0,
            1e-5,
        );
        assert!(max_rel_err(&analytic, &numeric) < 1e-4);
    }

    #[test]
    fn kl_pair_rejects_nonpositive_probability_under_positive_target() {
        let p = DenseMatrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let bad = DenseMatrix::from_rows(&[vec![0.0, 1.0]]).unwrap();
        let mut tape = Tape::new();
        let z = tape.constant(bad.clone());
        let q = tape.constant(bad);
        assert!(matches!(
            tape.kl_pair_loss(z, q, &p, 1.0, 1.0),
            Err(AgcnError::Degenerate(_))
        ));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn matrix_strategy(max_dim: usize) -> impl Strategy<Value = DenseMatrix> {
            (1..=max_dim, 1..=max_dim).prop_flat_map(|(r, c)| {
                proptest::collection::vec(-8.0f64..8.0, r * c)
                    .prop_map(move |data| DenseMatrix::new(r, c, data).unwrap())
            })
        }

        proptest! {
            #[test]
            fn softmax_rows_sum_to_one_and_stay_positive(m in matrix_strategy(8)) {
                let mut tape = Tape::new();
                let x = tape.constant(m);
                let y = tape.softmax_rows(x);
                let v = tape.value(y);
                for i in 0..v.rows() {
                    let sum: f64 = v.row(i).iter().sum();
                    prop_assert!((sum - 1.0).abs() < 1e-12);
                    prop_assert!(v.row(i).iter().all(|&p| p > 0.0));
                }
            }

            #[test]
            fn l2_normalized_rows_have_unit_norm(m in matrix_strategy(8)) {
                let mut tape = Tape::new();
                let x = tape.constant(m);
                let soft = tape.softmax_rows(x); // guarantees nonzero rows
                let y = tape.l2_normalize_rows(soft).unwrap();
                let v = tape.value(y);
                for i in 0..v.rows() {
                    let norm: f64 = v.row(i).iter().map(|p| p * p).sum::<f64>().sqrt();
                    prop_assert!((norm - 1.0).abs() < 1e-12);
                }
            }

            #[test]
            fn concat_then_slice_is_bit_exact(a in matrix_strategy(6), cols in 1usize..6) {
                let rows = a.rows();
                let b = DenseMatrix::filled(rows, cols, 0.125);
                let mut tape = Tape::new();
                let an = tape.constant(a.clone());
                let bn = tape.constant(b.clone());
                let cat = tape.concat_cols(&[an, bn]).unwrap();
                let left = tape.slice_cols(cat, 0, a.cols()).unwrap();
                let right = tape.slice_cols(cat, a.cols(), cols).unwrap();
                let bits = |m: &DenseMatrix| m.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
                prop_assert_eq!(bits(tape.value(left)), bits(&a));
                prop_assert_eq!(bits(tape.value(right)), bits(&b));
            }
        }
    }
}
