//! The clustering network: auto-encoder, graph-convolution stack with
//! attention fusion, prediction layer and self-training distributions.
//!
//! Two fusion mechanisms feed the pipeline:
//!
//! - heterogeneity-wise: at every depth, the graph feature `Z_i` and the
//!   encoder feature `H_i` are blended per sample by a learned 2-way
//!   attention row (softmax then ℓ₂ over each row);
//! - scale-wise: the prediction layer consumes the concatenation of all
//!   graph features plus the bottleneck, each block scaled per sample by a
//!   learned (l+1)-way attention row.
//!
//! Both mechanisms are optional, giving the four ablation configurations:
//! with everything off the graph stack consumes each `Z_i` directly and the
//! prediction layer sees only the deepest feature.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{AgcnError, Result};
use crate::graph::SparseAdjacency;
use crate::matrix::DenseMatrix;
use crate::rng::Rng;
use crate::tape::{NodeId, Tape};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AgcnConfig {
    /// `[d, d_1, ..., d_l]`: input width then one entry per encoder layer.
    pub layer_dims: Vec<usize>,
    /// Number of clusters.
    pub k: usize,
    /// Student's-t degrees of freedom for the soft assignment.
    pub alpha: f64,
    /// Weight of KL(P ‖ Z), the prediction-alignment term.
    pub lambda1: f64,
    /// Weight of KL(P ‖ Q), the embedding-alignment term.
    pub lambda2: f64,
    /// Heterogeneity-wise attention fusion.
    pub use_agcnh: bool,
    /// Multi-scale concatenation feeding the prediction layer.
    pub use_agcns_concat: bool,
    /// Attention weighting of the multi-scale blocks (requires concat).
    pub use_agcns_attention: bool,
    pub leaky_slope: f64,
    /// Seed for weight initialization.
    pub seed: u64,
}

impl AgcnConfig {
    /// Paper-style defaults: 500-500-2000-10 stack, everything enabled.
    pub fn new(input_dim: usize, k: usize) -> Self {
        let mut layer_dims = vec![input_dim];
        layer_dims.extend_from_slice(&[500, 500, 2000, 10]);
        AgcnConfig {
            layer_dims,
            k,
            alpha: 1.0,
            lambda1: 0.1,
            lambda2: 0.01,
            use_agcnh: true,
            use_agcns_concat: true,
            use_agcns_attention: true,
            leaky_slope: 0.2,
            seed: 0,
        }
    }

    /// Number of encoder layers `l`.
    pub fn depth(&self) -> usize {
        self.layer_dims.len() - 1
    }

    /// Width of the multi-scale concatenation `[Z_1..Z_l, H_l]`.
    pub fn concat_dim(&self) -> usize {
        self.layer_dims[1..].iter().sum::<usize>() + self.layer_dims[self.depth()]
    }

    /// Input width of the prediction layer under the current flags.
    pub fn prediction_dim(&self) -> usize {
        if self.use_agcns_concat {
            self.concat_dim()
        } else {
            self.layer_dims[self.depth()]
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_dims.len() < 3 {
            return Err(AgcnError::InvalidArgument(
                "need at least two encoder layers (layer_dims of length >= 3)".into(),
            ));
        }
        if self.layer_dims.contains(&0) {
            return Err(AgcnError::InvalidArgument("zero layer width".into()));
        }
        if self.k == 0 {
            return Err(AgcnError::InvalidArgument("k must be at least 1".into()));
        }
        if self.alpha <= 0.0 {
            return Err(AgcnError::InvalidArgument("alpha must be positive".into()));
        }
        if self.lambda1 < 0.0 || self.lambda2 < 0.0 {
            return Err(AgcnError::InvalidArgument(
                "loss weights must be nonnegative".into(),
            ));
        }
        if !(0.0 < self.leaky_slope && self.leaky_slope < 1.0) {
            return Err(AgcnError::InvalidArgument(
                "leaky slope must lie in (0, 1)".into(),
            ));
        }
        if self.use_agcns_attention && !self.use_agcns_concat {
            return Err(AgcnError::InvalidArgument(
                "scale attention requires the multi-scale concatenation".into(),
            ));
        }
        Ok(())
    }
}

/// Every trainable tensor of the network. Which attention tensors exist
/// depends on the configuration flags; the prediction weight width follows
/// the prediction input.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AgcnParams {
    pub enc_w: Vec<DenseMatrix>,
    pub enc_b: Vec<DenseMatrix>,
    pub dec_w: Vec<DenseMatrix>,
    pub dec_b: Vec<DenseMatrix>,
    /// Graph-layer weights; entry i maps width `d_i` to `d_{i+1}` (entry 0
    /// consumes the raw input).
    pub gcn_w: Vec<DenseMatrix>,
    /// Per-layer 2-way fusion attention (`2 d_i × 2`), present when the
    /// heterogeneity fusion is enabled.
    pub attn_h_w: Vec<DenseMatrix>,
    /// Scale attention (`concat_dim × (l+1)`), present when enabled.
    pub attn_s_w: Option<DenseMatrix>,
    pub pred_w: DenseMatrix,
    /// k×d_l cluster centers; zero until initialized from the pretrained
    /// embedding, then trained by gradient.
    pub centroids: DenseMatrix,
}

impl AgcnParams {
    /// Seed-deterministic initialization: every weight uniform in
    /// `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, biases alike, centroids zero.
    pub fn init(cfg: &AgcnConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = Rng::new(cfg.seed);
        let dims = &cfg.layer_dims;
        let l = cfg.depth();

        let init = |rows: usize, cols: usize, rng: &mut Rng| {
            let bound = 1.0 / (rows as f64).sqrt();
            let mut m = DenseMatrix::zeros(rows, cols);
            for v in m.data_mut() {
                *v = rng.uniform(-bound, bound);
            }
            m
        };
        let bias = |fan_in: usize, cols: usize, rng: &mut Rng| {
            let bound = 1.0 / (fan_in as f64).sqrt();
            let mut m = DenseMatrix::zeros(1, cols);
            for v in m.data_mut() {
                *v = rng.uniform(-bound, bound);
            }
            m
        };

        let mut enc_w = Vec::new();
        let mut enc_b = Vec::new();
        for i in 0..l {
            enc_w.push(init(dims[i], dims[i + 1], &mut rng));
            enc_b.push(bias(dims[i], dims[i + 1], &mut rng));
        }
        let rev: Vec<usize> = dims.iter().rev().copied().collect();
        let mut dec_w = Vec::new();
        let mut dec_b = Vec::new();
        for i in 0..l {
            dec_w.push(init(rev[i], rev[i + 1], &mut rng));
            dec_b.push(bias(rev[i], rev[i + 1], &mut rng));
        }
        let mut gcn_w = Vec::new();
        for i in 0..l {
            gcn_w.push(init(dims[i], dims[i + 1], &mut rng));
        }
        let mut attn_h_w = Vec::new();
        if cfg.use_agcnh {
            for i in 0..l {
                attn_h_w.push(init(2 * dims[i + 1], 2, &mut rng));
            }
        }
        let attn_s_w = cfg
            .use_agcns_attention
            .then(|| init(cfg.concat_dim(), l + 1, &mut rng));
        let pred_w = init(cfg.prediction_dim(), cfg.k, &mut rng);
        let centroids = DenseMatrix::zeros(cfg.k, dims[l]);

        Ok(AgcnParams {
            enc_w,
            enc_b,
            dec_w,
            dec_b,
            gcn_w,
            attn_h_w,
            attn_s_w,
            pred_w,
            centroids,
        })
    }

    /// All tensors in a fixed order, named for diagnostics.
    pub fn tensors(&self) -> Vec<(String, &DenseMatrix)> {
        let mut out = Vec::new();
        for (i, m) in self.enc_w.iter().enumerate() {
            out.push((format!("enc_w[{i}]"), m));
        }
        for (i, m) in self.enc_b.iter().enumerate() {
            out.push((format!("enc_b[{i}]"), m));
        }
        for (i, m) in self.dec_w.iter().enumerate() {
            out.push((format!("dec_w[{i}]"), m));
        }
        for (i, m) in self.dec_b.iter().enumerate() {
            out.push((format!("dec_b[{i}]"), m));
        }
        for (i, m) in self.gcn_w.iter().enumerate() {
            out.push((format!("gcn_w[{i}]"), m));
        }
        for (i, m) in self.attn_h_w.iter().enumerate() {
            out.push((format!("attn_h_w[{i}]"), m));
        }
        if let Some(m) = &self.attn_s_w {
            out.push(("attn_s_w".to_string(), m));
        }
        out.push(("pred_w".to_string(), &self.pred_w));
        out.push(("centroids".to_string(), &self.centroids));
        out
    }

    /// Mutable view over the same tensors, same order as [`Self::tensors`].
    pub fn tensors_mut(&mut self) -> Vec<(String, &mut DenseMatrix)> {
        let mut out: Vec<(String, &mut DenseMatrix)> = Vec::new();
        for (i, m) in self.enc_w.iter_mut().enumerate() {
            out.push((format!("enc_w[{i}]"), m));
        }
        for (i, m) in self.enc_b.iter_mut().enumerate() {
            out.push((format!("enc_b[{i}]"), m));
        }
        for (i, m) in self.dec_w.iter_mut().enumerate() {
            out.push((format!("dec_w[{i}]"), m));
        }
        for (i, m) in self.dec_b.iter_mut().enumerate() {
            out.push((format!("dec_b[{i}]"), m));
        }
        for (i, m) in self.gcn_w.iter_mut().enumerate() {
            out.push((format!("gcn_w[{i}]"), m));
        }
        for (i, m) in self.attn_h_w.iter_mut().enumerate() {
            out.push((format!("attn_h_w[{i}]"), m));
        }
        if let Some(m) = self.attn_s_w.as_mut() {
            out.push(("attn_s_w".to_string(), m));
        }
        out.push(("pred_w".to_string(), &mut self.pred_w));
        out.push(("centroids".to_string(), &mut self.centroids));
        out
    }

    /// Auto-encoder subset (same relative order), used by pretraining.
    pub fn ae_tensors_mut(&mut self) -> Vec<(String, &mut DenseMatrix)> {
        let mut out: Vec<(String, &mut DenseMatrix)> = Vec::new();
        for (i, m) in self.enc_w.iter_mut().enumerate() {
            out.push((format!("enc_w[{i}]"), m));
        }
        for (i, m) in self.enc_b.iter_mut().enumerate() {
            out.push((format!("enc_b[{i}]"), m));
        }
        for (i, m) in self.dec_w.iter_mut().enumerate() {
            out.push((format!("dec_w[{i}]"), m));
        }
        for (i, m) in self.dec_b.iter_mut().enumerate() {
            out.push((format!("dec_b[{i}]"), m));
        }
        out
    }

    /// Register every tensor on a tape as trainable leaves.
    pub fn register(&self, tape: &mut Tape) -> ParamNodes {
        ParamNodes {
            enc_w: self.enc_w.iter().map(|m| tape.parameter(m.clone())).collect(),
            enc_b: self.enc_b.iter().map(|m| tape.parameter(m.clone())).collect(),
            dec_w: self.dec_w.iter().map(|m| tape.parameter(m.clone())).collect(),
            dec_b: self.dec_b.iter().map(|m| tape.parameter(m.clone())).collect(),
            gcn_w: self.gcn_w.iter().map(|m| tape.parameter(m.clone())).collect(),
            attn_h_w: self
                .attn_h_w
                .iter()
                .map(|m| tape.parameter(m.clone()))
                .collect(),
            attn_s_w: self.attn_s_w.as_ref().map(|m| tape.parameter(m.clone())),
            pred_w: Some(tape.parameter(self.pred_w.clone())),
            centroids: Some(tape.parameter(self.centroids.clone())),
        }
    }

    /// Register only the auto-encoder tensors (pretraining phase).
    pub fn register_ae(&self, tape: &mut Tape) -> ParamNodes {
        ParamNodes {
            enc_w: self.enc_w.iter().map(|m| tape.parameter(m.clone())).collect(),
            enc_b: self.enc_b.iter().map(|m| tape.parameter(m.clone())).collect(),
            dec_w: self.dec_w.iter().map(|m| tape.parameter(m.clone())).collect(),
            dec_b: self.dec_b.iter().map(|m| tape.parameter(m.clone())).collect(),
            gcn_w: Vec::new(),
            attn_h_w: Vec::new(),
            attn_s_w: None,
            pred_w: None,
            centroids: None,
        }
    }
}

/// Tape node ids of the registered parameters, in [`AgcnParams::tensors`]
/// order.
pub struct ParamNodes {
    pub enc_w: Vec<NodeId>,
    pub enc_b: Vec<NodeId>,
    pub dec_w: Vec<NodeId>,
    pub dec_b: Vec<NodeId>,
    pub gcn_w: Vec<NodeId>,
    pub attn_h_w: Vec<NodeId>,
    pub attn_s_w: Option<NodeId>,
    pub pred_w: Option<NodeId>,
    pub centroids: Option<NodeId>,
}

impl ParamNodes {
    pub fn ids(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        out.extend(&self.enc_w);
        out.extend(&self.enc_b);
        out.extend(&self.dec_w);
        out.extend(&self.dec_b);
        out.extend(&self.gcn_w);
        out.extend(&self.attn_h_w);
        out.extend(self.attn_s_w.iter());
        out.extend(self.pred_w.iter());
        out.extend(self.centroids.iter());
        out
    }
}

/// Node ids produced by one full forward pass, plus the constant target
/// distribution used by the KL term.
pub struct ForwardPass {
    /// Encoder features `H_1..H_l`.
    pub h: Vec<NodeId>,
    pub x_hat: NodeId,
    /// Graph features `Z_1..Z_l`.
    pub z: Vec<NodeId>,
    /// Fused features `Z'_1..Z'_l` (equal to `z` when fusion is off).
    pub z_prime: Vec<NodeId>,
    /// Per-layer fusion attention rows (empty when fusion is off).
    pub m: Vec<NodeId>,
    /// Scale attention rows, when enabled.
    pub u: Option<NodeId>,
    /// Prediction-layer input.
    pub z_fused: NodeId,
    /// Row-stochastic prediction `Z`.
    pub z_pred: NodeId,
    /// Soft assignment `Q`.
    pub q: NodeId,
    /// Target distribution `P` (constant w.r.t. gradients).
    pub p: DenseMatrix,
    pub rec_loss: NodeId,
    pub kl_loss: NodeId,
    pub total_loss: NodeId,
}

/// Encoder-decoder chain. Hidden layers use ReLU; the bottleneck and the
/// final reconstruction are linear. Returns `(H_1..H_l, X̂)`.
pub fn ae_forward(
    tape: &mut Tape,
    x: NodeId,
    nodes: &ParamNodes,
    cfg: &AgcnConfig,
) -> Result<(Vec<NodeId>, NodeId)> {
    let l = cfg.depth();
    if tape.value(x).cols() != cfg.layer_dims[0] {
        return Err(AgcnError::ShapeMismatch {
            op: "ae_forward",
            lhs: tape.value(x).shape_str(),
            rhs: format!("input width {}", cfg.layer_dims[0]),
        });
    }
    let mut h = Vec::with_capacity(l);
    let mut cur = x;
    for i in 0..l {
        let lin = tape.matmul(cur, nodes.enc_w[i])?;
        let biased = tape.bias_add(lin, nodes.enc_b[i])?;
        cur = if i + 1 < l { tape.relu(biased) } else { biased };
        h.push(cur);
    }
    let mut dec = cur;
    for i in 0..l {
        let lin = tape.matmul(dec, nodes.dec_w[i])?;
        let biased = tape.bias_add(lin, nodes.dec_b[i])?;
        dec = if i + 1 < l { tape.relu(biased) } else { biased };
    }
    Ok((h, dec))
}

/// Fusion attention rows for one layer:
/// `M = ℓ₂(softmax(LeakyReLU([Z ‖ H] · Wᵃ)))`, shape n×2.
pub fn attention_h(
    tape: &mut Tape,
    z: NodeId,
    h: NodeId,
    w_a: NodeId,
    slope: f64,
) -> Result<NodeId> {
    let cat = tape.concat_cols(&[z, h])?;
    let logits = tape.matmul(cat, w_a)?;
    let act = tape.leaky_relu(logits, slope)?;
    let soft = tape.softmax_rows(act);
    tape.l2_normalize_rows(soft)
}

/// Weighted blend `Z' = (m₁·1) ⊙ Z + (m₂·1) ⊙ H` with the two columns of
/// `m` acting as per-row scalars.
pub fn fuse_h(tape: &mut Tape, z: NodeId, h: NodeId, m: NodeId) -> Result<NodeId> {
    let m_z = tape.slice_cols(m, 0, 1)?;
    let m_h = tape.slice_cols(m, 1, 1)?;
    let part_z = tape.scale_rows(z, m_z)?;
    let part_h = tape.scale_rows(h, m_h)?;
    tape.add(part_z, part_h)
}

/// One graph layer: `LeakyReLU(Â · Z' · W)`.
pub fn gcn_layer(
    tape: &mut Tape,
    adj: &Arc<SparseAdjacency>,
    input: NodeId,
    w: NodeId,
    slope: f64,
) -> Result<NodeId> {
    let propagated = tape.spmm(adj, input)?;
    let transformed = tape.matmul(propagated, w)?;
    tape.leaky_relu(transformed, slope)
}

/// Scale attention rows `U = ℓ₂(softmax(LeakyReLU([Z_1‖..‖Z_l‖H_l]·Wˢ)))`,
/// shape n×(l+1).
pub fn attention_s(
    tape: &mut Tape,
    scale_features: &[NodeId],
    w_s: NodeId,
    slope: f64,
) -> Result<NodeId> {
    let cat = tape.concat_cols(scale_features)?;
    let logits = tape.matmul(cat, w_s)?;
    let act = tape.leaky_relu(logits, slope)?;
    let soft = tape.softmax_rows(act);
    tape.l2_normalize_rows(soft)
}

/// Weighted multi-scale concatenation. With `u = None` every block keeps
/// unit weight and this is the plain concatenation.
pub fn fuse_s(tape: &mut Tape, scale_features: &[NodeId], u: Option<NodeId>) -> Result<NodeId> {
    match u {
        None => tape.concat_cols(scale_features),
        Some(u) => {
            if tape.value(u).cols() != scale_features.len() {
                return Err(AgcnError::ShapeMismatch {
                    op: "fuse_s",
                    lhs: tape.value(u).shape_str(),
                    rhs: format!("{} scale features", scale_features.len()),
                });
            }
            let mut weighted = Vec::with_capacity(scale_features.len());
            for (idx, &feat) in scale_features.iter().enumerate() {
                let col = tape.slice_cols(u, idx, 1)?;
                weighted.push(tape.scale_rows(feat, col)?);
            }
            tape.concat_cols(&weighted)
        }
    }
}

/// Prediction layer `Z = softmax(Â · Z' · W)`; rows are probability
/// distributions over the k clusters.
pub fn predict_layer(
    tape: &mut Tape,
    adj: &Arc<SparseAdjacency>,
    z_fused: NodeId,
    w: NodeId,
) -> Result<NodeId> {
    let propagated = tape.spmm(adj, z_fused)?;
    let logits = tape.matmul(propagated, w)?;
    Ok(tape.softmax_rows(logits))
}

/// Target distribution `p_ij = (q²_ij / f_j) / Σ_j' (q²_ij' / f_j')` with
/// `f_j` the soft cluster frequency. Treated as a constant during
/// differentiation.
pub fn target_distribution(q: &DenseMatrix) -> Result<DenseMatrix> {
    let (n, k) = q.shape();
    let mut freq = vec![0.0f64; k];
    for i in 0..n {
        for (j, f) in freq.iter_mut().enumerate() {
            *f += q.get(i, j);
        }
    }
    if let Some(j) = freq.iter().position(|&f| f <= 0.0) {
        return Err(AgcnError::Degenerate(format!(
            "target distribution: cluster column {j} has zero mass"
        )));
    }
    let mut p = DenseMatrix::zeros(n, k);
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..k {
            let v = q.get(i, j) * q.get(i, j) / freq[j];
            p.set(i, j, v);
            row_sum += v;
        }
        for j in 0..k {
            p.set(i, j, p.get(i, j) / row_sum);
        }
    }
    Ok(p)
}

/// Hard labels `y_i = argmax_j z_ij`; ties break to the lowest index.
pub fn predict_labels(z: &DenseMatrix) -> Vec<usize> {
    (0..z.rows())
        .map(|i| {
            let row = z.row(i);
            let mut best = 0;
            for (j, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

/// Full forward pass: reconstruction, fused graph stack, prediction,
/// distributions and the combined loss `L_R + L_KL`.
///
/// `fixed_p` substitutes the target distribution instead of deriving it
/// from the current soft assignment; gradient checking uses this to hold
/// the target constant across perturbed evaluations.
pub fn forward(
    tape: &mut Tape,
    x: NodeId,
    adj: &Arc<SparseAdjacency>,
    nodes: &ParamNodes,
    cfg: &AgcnConfig,
    fixed_p: Option<&DenseMatrix>,
) -> Result<ForwardPass> {
    cfg.validate()?;
    let l = cfg.depth();
    let slope = cfg.leaky_slope;
    let (h, x_hat) = ae_forward(tape, x, nodes, cfg)?;

    let mut z = Vec::with_capacity(l);
    let mut z_prime = Vec::with_capacity(l);
    let mut m = Vec::new();
    let mut cur = x;
    for i in 0..l {
        let zi = gcn_layer(tape, adj, cur, nodes.gcn_w[i], slope)?;
        z.push(zi);
        let fused = if cfg.use_agcnh {
            let mi = attention_h(tape, zi, h[i], nodes.attn_h_w[i], slope)?;
            m.push(mi);
            fuse_h(tape, zi, h[i], mi)?
        } else {
            zi
        };
        z_prime.push(fused);
        cur = fused;
    }

    let (z_fused, u) = if cfg.use_agcns_concat {
        let mut scale_features = z.clone();
        scale_features.push(h[l - 1]);
        if cfg.use_agcns_attention {
            let w_s = nodes.attn_s_w.ok_or_else(|| {
                AgcnError::InvalidArgument("scale attention enabled without weights".into())
            })?;
            let u = attention_s(tape, &scale_features, w_s, slope)?;
            (fuse_s(tape, &scale_features, Some(u))?, Some(u))
        } else {
            (fuse_s(tape, &scale_features, None)?, None)
        }
    } else {
        (z_prime[l - 1], None)
    };

    let pred_w = nodes
        .pred_w
        .ok_or_else(|| AgcnError::InvalidArgument("prediction weights missing".into()))?;
    let centroids = nodes
        .centroids
        .ok_or_else(|| AgcnError::InvalidArgument("centroids missing".into()))?;
    let z_pred = predict_layer(tape, adj, z_fused, pred_w)?;
    let q = tape.student_t_assignment(h[l - 1], centroids, cfg.alpha)?;

    let p = match fixed_p {
        Some(p) => p.clone(),
        None => target_distribution(tape.value(q))?,
    };
    let rec_loss = tape.frobenius_sq_loss(x_hat, x)?;
    let kl_loss = tape.kl_pair_loss(z_pred, q, &p, cfg.lambda1, cfg.lambda2)?;
    let total_loss = tape.add(rec_loss, kl_loss)?;

    Ok(ForwardPass {
        h,
        x_hat,
        z,
        z_prime,
        m,
        u,
        z_fused,
        z_pred,
        q,
        p,
        rec_loss,
        kl_loss,
        total_loss,
    })
}

/// Convenience: register parameters on a fresh tape and run [`forward`].
pub fn evaluate(
    x: &DenseMatrix,
    adj: &Arc<SparseAdjacency>,
    params: &AgcnParams,
    cfg: &AgcnConfig,
    fixed_p: Option<&DenseMatrix>,
) -> Result<(Tape, ParamNodes, ForwardPass)> {
    let mut tape = Tape::new();
    let x_node = tape.constant(x.clone());
    let nodes = params.register(&mut tape);
    let pass = forward(&mut tape, x_node, adj, &nodes, cfg, fixed_p)?;
    Ok((tape, nodes, pass))
}

/// Bottleneck embedding `H_l` of the auto-encoder, without touching the
/// graph stack. Used to seed the centroids.
pub fn ae_embed(x: &DenseMatrix, params: &AgcnParams, cfg: &AgcnConfig) -> Result<DenseMatrix> {
    let mut tape = Tape::new();
    let x_node = tape.constant(x.clone());
    let nodes = params.register_ae(&mut tape);
    let (h, _) = ae_forward(&mut tape, x_node, &nodes, cfg)?;
    Ok(tape.value(h[cfg.depth() - 1]).clone())
}

/// Worst-case deviations from the distribution invariants of one forward
/// pass: attention rows off unit norm, probability rows off unit sum.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct InvariantDeviations {
    pub fusion_row_norm: f64,
    pub scale_row_norm: f64,
    pub probability_row_sum: f64,
}

pub fn invariant_deviations(tape: &Tape, pass: &ForwardPass) -> InvariantDeviations {
    let row_norm_dev = |m: &DenseMatrix| {
        (0..m.rows())
            .map(|i| {
                let norm: f64 = m.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
                (norm - 1.0).abs()
            })
            .fold(0.0, f64::max)
    };
    let row_sum_dev = |m: &DenseMatrix| {
        (0..m.rows())
            .map(|i| (m.row(i).iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    };
    let fusion = pass
        .m
        .iter()
        .map(|&id| row_norm_dev(tape.value(id)))
        .fold(0.0, f64::max);
    let scale = pass.u.map_or(0.0, |id| row_norm_dev(tape.value(id)));
    let prob = row_sum_dev(tape.value(pass.z_pred))
        .max(row_sum_dev(tape.value(pass.q)))
        .max(row_sum_dev(&pass.p));
    InvariantDeviations {
        fusion_row_norm: fusion,
        scale_row_norm: scale,
        probability_row_sum: prob,
    }
}
