//! Two-phase optimization: auto-encoder pretraining on shuffled
//! mini-batches, then joint full-batch self-supervised training.
//!
//! The joint phase is deliberately full-batch — the propagation operator
//! couples every node, so per-iteration mini-batching would change the
//! semantics of the graph layers. The configured batch size applies to the
//! pretraining phase only.
//!
//! Centroids are initialized once from k-means on the pretrained bottleneck
//! embedding and afterwards updated by gradient like any other parameter.

use serde::{Deserialize, Serialize};

use crate::error::{AgcnError, Result};
use crate::graph::SparseAdjacency;
use crate::kmeans::kmeans;
use crate::matrix::DenseMatrix;
use crate::metrics::{self, RunMetrics};
use crate::model::{self, AgcnConfig, AgcnParams, InvariantDeviations};
use crate::rng::Rng;
use crate::tape::Tape;
use std::sync::Arc;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainConfig {
    pub pretrain_epochs: usize,
    pub pretrain_lr: f64,
    pub pretrain_batch: usize,
    pub joint_lr: f64,
    /// Joint-phase iterations (`i_MaxIter`). No early stopping.
    pub max_iters: usize,
    /// Seed for batch shuffling and centroid initialization.
    pub seed: u64,
    /// Evaluate metrics every this many iterations when labels are known.
    pub eval_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            pretrain_epochs: 30,
            pretrain_lr: 1e-3,
            pretrain_batch: 256,
            joint_lr: 1e-3,
            max_iters: 200,
            seed: 0,
            eval_every: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pretrain_epochs == 0
            || self.pretrain_batch == 0
            || self.max_iters == 0
            || self.eval_every == 0
        {
            return Err(AgcnError::InvalidArgument(
                "epoch, batch and iteration counts must be at least 1".into(),
            ));
        }
        if self.pretrain_lr <= 0.0 || self.joint_lr <= 0.0 {
            return Err(AgcnError::InvalidArgument(
                "learning rates must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One joint-phase iteration record.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub loss_total: f64,
    pub loss_rec: f64,
    pub loss_kl: f64,
    /// Present on evaluation iterations when ground truth was supplied.
    pub metrics: Option<RunMetrics>,
    pub deviations: InvariantDeviations,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct TrainTrace {
    pub records: Vec<TraceRecord>,
}

impl TrainTrace {
    /// CSV stream with the fixed header
    /// `iter,loss_total,loss_rec,loss_kl,acc,nmi,ari,f1`; metric fields are
    /// empty on iterations without an evaluation.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,loss_total,loss_rec,loss_kl,acc,nmi,ari,f1\n");
        for r in &self.records {
            out.push_str(&format!("{},{},{},{}", r.iter, r.loss_total, r.loss_rec, r.loss_kl));
            match &r.metrics {
                Some(m) => out.push_str(&format!(",{},{},{},{}\n", m.acc, m.nmi, m.ari, m.f1)),
                None => out.push_str(",,,,\n"),
            }
        }
        out
    }

    pub fn last_metrics(&self) -> Option<RunMetrics> {
        self.records.iter().rev().find_map(|r| r.metrics.clone())
    }

    /// Best value seen per metric across the trace, if anything was
    /// evaluated. The default report uses the final iteration; this is
    /// exposed alongside it for comparison.
    pub fn best_metrics(&self) -> Option<RunMetrics> {
        let evaluated: Vec<&RunMetrics> = self.records.iter().filter_map(|r| r.metrics.as_ref()).collect();
        if evaluated.is_empty() {
            return None;
        }
        let pick = |f: fn(&RunMetrics) -> f64| evaluated.iter().map(|m| f(m)).fold(f64::NEG_INFINITY, f64::max);
        Some(RunMetrics {
            acc: pick(|m| m.acc),
            nmi: pick(|m| m.nmi),
            ari: pick(|m| m.ari),
            f1: pick(|m| m.f1),
        })
    }
}

/// Everything a finished run hands back to the caller.
#[derive(Debug)]
pub struct TrainOutcome {
    pub params: AgcnParams,
    pub trace: TrainTrace,
    /// Hard cluster labels from the final iteration's prediction.
    pub labels: Vec<usize>,
    /// Bottleneck embedding at the final iteration.
    pub embedding: DenseMatrix,
    /// Final prediction distribution.
    pub prediction: DenseMatrix,
    pub pretrain_losses: Vec<f64>,
}

// ── Adam ─────────────────────────────────────────────────────────────

/// Standard Adam with bias correction (β₁ = 0.9, β₂ = 0.999, ε = 1e-8).
pub struct AdamState {
    m: Vec<DenseMatrix>,
    v: Vec<DenseMatrix>,
    t: u64,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl AdamState {
    pub fn new(shapes: &[(usize, usize)]) -> Self {
        AdamState {
            m: shapes.iter().map(|&(r, c)| DenseMatrix::zeros(r, c)).collect(),
            v: shapes.iter().map(|&(r, c)| DenseMatrix::zeros(r, c)).collect(),
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn for_params(tensors: &[(String, &DenseMatrix)]) -> Self {
        Self::new(&tensors.iter().map(|(_, t)| t.shape()).collect::<Vec<_>>())
    }

    /// One update over aligned (parameter, gradient) pairs. A non-finite
    /// gradient aborts with the offending parameter named.
    pub fn step(
        &mut self,
        params: &mut [(String, &mut DenseMatrix)],
        grads: &[DenseMatrix],
        lr: f64,
    ) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(AgcnError::InvalidArgument(format!(
                "optimizer state for {} tensors, got {} params / {} grads",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for (idx, (name, tensor)) in params.iter_mut().enumerate() {
            let grad = &grads[idx];
            if tensor.shape() != grad.shape() {
                return Err(AgcnError::ShapeMismatch {
                    op: "adam_step",
                    lhs: tensor.shape_str(),
                    rhs: grad.shape_str(),
                });
            }
            if !grad.all_finite() {
                return Err(AgcnError::Numerical(format!(
                    "non-finite gradient for parameter {name}"
                )));
            }
            let m = &mut self.m[idx];
            let v = &mut self.v[idx];
            for ((p, &g), (mi, vi)) in tensor
                .data_mut()
                .iter_mut()
                .zip(grad.data())
                .zip(m.data_mut().iter_mut().zip(v.data_mut().iter_mut()))
            {
                *mi = self.beta1 * *mi + (1.0 - self.beta1) * g;
                *vi = self.beta2 * *vi + (1.0 - self.beta2) * g * g;
                let m_hat = *mi / bc1;
                let v_hat = *vi / bc2;
                *p -= lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}

// ── Pretraining ──────────────────────────────────────────────────────

/// Minimize the reconstruction loss over shuffled mini-batches. Mutates the
/// auto-encoder tensors of `params` in place and returns the per-epoch loss
/// curve. Deterministic given the seed.
pub fn pretrain_ae(
    x: &DenseMatrix,
    params: &mut AgcnParams,
    model_cfg: &AgcnConfig,
    train_cfg: &TrainConfig,
) -> Result<Vec<f64>> {
    train_cfg.validate()?;
    let n = x.rows();
    let mut rng = Rng::new(train_cfg.seed);
    let shapes: Vec<(usize, usize)> = params
        .ae_tensors_mut()
        .iter()
        .map(|(_, t)| t.shape())
        .collect();
    let mut adam = AdamState::new(&shapes);
    let mut epoch_losses = Vec::with_capacity(train_cfg.pretrain_epochs);

    for epoch in 0..train_cfg.pretrain_epochs {
        let mut order: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut order);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(train_cfg.pretrain_batch) {
            let rows: Vec<Vec<f64>> = batch.iter().map(|&i| x.row(i).to_vec()).collect();
            let xb = DenseMatrix::from_rows(&rows)?;
            let mut tape = Tape::new();
            let x_node = tape.constant(xb);
            let nodes = params.register_ae(&mut tape);
            let (_, x_hat) = model::ae_forward(&mut tape, x_node, &nodes, model_cfg)?;
            let loss = tape.frobenius_sq_loss(x_hat, x_node)?;
            let loss_value = tape.value(loss).get(0, 0);
            if !loss_value.is_finite() {
                return Err(AgcnError::Numerical(format!(
                    "pretraining loss became non-finite in epoch {epoch}"
                )));
            }
            epoch_loss += loss_value;
            tape.backward(loss)?;
            let grads: Vec<DenseMatrix> =
                nodes.ids().iter().map(|&id| tape.grad_or_zeros(id)).collect();
            adam.step(&mut params.ae_tensors_mut(), &grads, train_cfg.pretrain_lr)?;
        }
        epoch_losses.push(epoch_loss);
    }
    Ok(epoch_losses)
}

// ── Joint training ───────────────────────────────────────────────────

/// Full training pipeline: pretrain the auto-encoder, seed the centroids by
/// k-means on the bottleneck embedding, then run `max_iters` full-batch
/// iterations of the joint objective. Exactly `max_iters` records land in
/// the trace, and the returned labels come from the final iteration's
/// prediction.
pub fn train(
    x: &DenseMatrix,
    adjacency: &SparseAdjacency,
    model_cfg: &AgcnConfig,
    train_cfg: &TrainConfig,
    labels: Option<&[usize]>,
) -> Result<TrainOutcome> {
    model_cfg.validate()?;
    train_cfg.validate()?;
    if adjacency.node_count() != x.rows() {
        return Err(AgcnError::Validation(format!(
            "feature rows ({}) and graph nodes ({}) disagree",
            x.rows(),
            adjacency.node_count()
        )));
    }
    if let Some(y) = labels {
        if y.len() != x.rows() {
            return Err(AgcnError::Validation(format!(
                "label count ({}) and feature rows ({}) disagree",
                y.len(),
                x.rows()
            )));
        }
    }
    if x.rows() < model_cfg.k {
        return Err(AgcnError::InvalidArgument(format!(
            "k = {} exceeds sample count {}",
            model_cfg.k,
            x.rows()
        )));
    }

    let adj = Arc::new(adjacency.normalize()?);
    let mut params = AgcnParams::init(model_cfg)?;
    let pretrain_losses = pretrain_ae(x, &mut params, model_cfg, train_cfg)?;

    let embedding = model::ae_embed(x, &params, model_cfg)?;
    let km = kmeans(&embedding, model_cfg.k, train_cfg.seed, 300)?;
    params.centroids = km.centroids;

    let mut adam = AdamState::for_params(&params.tensors());
    let mut trace = TrainTrace::default();
    let mut final_labels = Vec::new();
    let mut final_embedding = DenseMatrix::zeros(0, 0);
    let mut final_prediction = DenseMatrix::zeros(0, 0);

    for iter in 1..=train_cfg.max_iters {
        let (mut tape, nodes, pass) = model::evaluate(x, &adj, &params, model_cfg, None)?;
        let loss_total = tape.value(pass.total_loss).get(0, 0);
        let loss_rec = tape.value(pass.rec_loss).get(0, 0);
        let loss_kl = tape.value(pass.kl_loss).get(0, 0);
        if !loss_total.is_finite() {
            return Err(AgcnError::Numerical(format!(
                "loss became non-finite at iteration {iter}"
            )));
        }

        let deviations = model::invariant_deviations(&tape, &pass);
        let prediction = tape.value(pass.z_pred).clone();
        let predicted = model::predict_labels(&prediction);
        let metrics_row = match labels {
            Some(y) if iter % train_cfg.eval_every == 0 || iter == train_cfg.max_iters => {
                Some(metrics::run_metrics(y, &predicted)?)
            }
            _ => None,
        };

        if iter == train_cfg.max_iters {
            final_labels = predicted;
            final_embedding = tape.value(pass.h[model_cfg.depth() - 1]).clone();
            final_prediction = prediction;
        }

        tape.backward(pass.total_loss)?;
        let grads: Vec<DenseMatrix> =
            nodes.ids().iter().map(|&id| tape.grad_or_zeros(id)).collect();
        adam.step(&mut params.tensors_mut(), &grads, train_cfg.joint_lr)?;

        trace.records.push(TraceRecord {
            iter,
            loss_total,
            loss_rec,
            loss_kl,
            metrics: metrics_row,
            deviations,
        });
    }

    Ok(TrainOutcome {
        params,
        trace,
        labels: final_labels,
        embedding: final_embedding,
        prediction: final_prediction,
        pretrain_losses,
    })
}
