//! Dataset ingestion, text file formats, synthetic block-model data and
//! run manifests.
//!
//! File formats (all plain text, diff-able, no dependencies):
//!
//! - feature matrix: header line `n d`, then `n` whitespace-separated rows
//!   of `d` decimal floats;
//! - labels: one integer per line;
//! - graph: edge list, one `u v` pair per line (see [`crate::graph`]).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{AgcnError, Result};
use crate::graph::{self, SparseAdjacency};
use crate::matrix::DenseMatrix;
use crate::model::AgcnConfig;
use crate::rng::Rng;
use crate::trainer::TrainConfig;

#[derive(Clone, Debug)]
pub struct Dataset {
    pub name: String,
    pub features: DenseMatrix,
    pub adjacency: Option<SparseAdjacency>,
    pub labels: Option<Vec<usize>>,
}

impl Dataset {
    pub fn samples(&self) -> usize {
        self.features.rows()
    }

    /// Number of distinct labels, when labels are present.
    pub fn class_count(&self) -> Option<usize> {
        self.labels.as_ref().map(|l| {
            let mut distinct: Vec<usize> = l.clone();
            distinct.sort_unstable();
            distinct.dedup();
            distinct.len()
        })
    }

    /// Content hash covering features, labels and adjacency; two datasets
    /// with the same fingerprint are byte-equivalent inputs.
    pub fn fingerprint(&self) -> String {
        let mut h = Fnv1a::new();
        h.write_usize(self.features.rows());
        h.write_usize(self.features.cols());
        for &v in self.features.data() {
            h.write_u64(v.to_bits());
        }
        match &self.labels {
            Some(labels) => {
                h.write_usize(labels.len());
                for &l in labels {
                    h.write_usize(l);
                }
            }
            None => h.write_usize(usize::MAX),
        }
        match &self.adjacency {
            Some(a) => {
                h.write_usize(a.node_count());
                for i in 0..a.node_count() {
                    for (j, v) in a.row(i) {
                        h.write_usize(i);
                        h.write_usize(j);
                        h.write_u64(v.to_bits());
                    }
                }
            }
            None => h.write_usize(usize::MAX),
        }
        format!("{:016x}", h.finish())
    }
}

struct Fnv1a(u64);

impl Fnv1a {
    fn new() -> Self {
        Fnv1a(0xcbf29ce484222325)
    }
    fn write_u64(&mut self, v: u64) {
        for byte in v.to_le_bytes() {
            self.0 ^= byte as u64;
            self.0 = self.0.wrapping_mul(0x100000001b3);
        }
    }
    fn write_usize(&mut self, v: usize) {
        self.write_u64(v as u64);
    }
    fn finish(&self) -> u64 {
        self.0
    }
}

// ── Matrix / label text formats ──────────────────────────────────────

pub fn format_matrix(m: &DenseMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for i in 0..m.rows() {
        let mut first = true;
        for &v in m.row(i) {
            if !first {
                out.push(' ');
            }
            let _ = write!(out, "{v}");
            first = false;
        }
        out.push('\n');
    }
    out
}

pub fn parse_matrix(text: &str, path: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let mut it = header.split_whitespace();
    let n: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| parse_err(path, 1, "header must be `n d`"))?;
    let d: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| parse_err(path, 1, "header must be `n d`"))?;
    if it.next().is_some() {
        return Err(parse_err(path, 1, "header must be exactly `n d`"));
    }
    let mut data = Vec::with_capacity(n * d);
    let mut rows_seen = 0usize;
    for (lineno, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut count = 0usize;
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|e| parse_err(path, lineno + 1, &format!("bad float: {e}")))?;
            data.push(v);
            count += 1;
        }
        if count != d {
            return Err(parse_err(
                path,
                lineno + 1,
                &format!("expected {d} values, found {count}"),
            ));
        }
        rows_seen += 1;
    }
    if rows_seen != n {
        return Err(AgcnError::Validation(format!(
            "{path}: header promises {n} rows, found {rows_seen}"
        )));
    }
    DenseMatrix::new(n, d, data)
}

pub fn format_labels(labels: &[usize]) -> String {
    let mut out = String::new();
    for l in labels {
        let _ = writeln!(out, "{l}");
    }
    out
}

pub fn parse_labels(text: &str, path: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: usize = line
            .parse()
            .map_err(|e| parse_err(path, lineno + 1, &format!("bad label: {e}")))?;
        out.push(v);
    }
    Ok(out)
}

fn parse_err(path: &str, line: usize, msg: &str) -> AgcnError {
    AgcnError::Parse {
        path: path.to_string(),
        line,
        msg: msg.to_string(),
    }
}

// ── Loading / saving ─────────────────────────────────────────────────

/// Load features plus optional edge list and labels, cross-validating row
/// counts.
pub fn load_dataset(
    feature_path: &Path,
    graph_path: Option<&Path>,
    label_path: Option<&Path>,
) -> Result<Dataset> {
    let text = std::fs::read_to_string(feature_path)?;
    let features = parse_matrix(&text, &feature_path.display().to_string())?;
    let n = features.rows();

    let adjacency = match graph_path {
        Some(p) => Some(graph::load_edge_list(p, n)?),
        None => None,
    };
    let labels = match label_path {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            let labels = parse_labels(&text, &p.display().to_string())?;
            if labels.len() != n {
                return Err(AgcnError::Validation(format!(
                    "feature file has {n} rows but label file has {} lines",
                    labels.len()
                )));
            }
            Some(labels)
        }
        None => None,
    };
    let name = feature_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    Ok(Dataset {
        name,
        features,
        adjacency,
        labels,
    })
}

/// Write `features.txt` (+ `graph.txt`, `labels.txt` when present) into a
/// directory. Returns the paths written.
pub fn save_dataset(dataset: &Dataset, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let fpath = dir.join("features.txt");
    std::fs::write(&fpath, format_matrix(&dataset.features))?;
    written.push(fpath);
    if let Some(a) = &dataset.adjacency {
        let gpath = dir.join("graph.txt");
        std::fs::write(&gpath, a.to_edge_list_string())?;
        written.push(gpath);
    }
    if let Some(l) = &dataset.labels {
        let lpath = dir.join("labels.txt");
        std::fs::write(&lpath, format_labels(l))?;
        written.push(lpath);
    }
    Ok(written)
}

// ── Synthetic data ───────────────────────────────────────────────────

/// Stochastic-block-model graph with per-block Gaussian features: block
/// `b`'s mean sits at `b·sep` along the first feature axis, unit variance
/// everywhere. Ground-truth labels are the block indices.
pub fn generate_synthetic(
    blocks: usize,
    per_block: usize,
    p_in: f64,
    p_out: f64,
    feat_dim: usize,
    sep: f64,
    seed: u64,
) -> Result<Dataset> {
    if blocks == 0 || per_block == 0 || feat_dim == 0 {
        return Err(AgcnError::InvalidArgument(
            "blocks, per_block and feat_dim must be positive".into(),
        ));
    }
    if !(0.0..=1.0).contains(&p_out) || !(0.0..=1.0).contains(&p_in) || p_out > p_in {
        return Err(AgcnError::InvalidArgument(format!(
            "need 0 <= p_out <= p_in <= 1, got p_in={p_in} p_out={p_out}"
        )));
    }
    let n = blocks * per_block;
    let mut rng = Rng::new(seed);
    let labels: Vec<usize> = (0..n).map(|i| i / per_block).collect();

    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if labels[u] == labels[v] { p_in } else { p_out };
            if rng.next_f64() < p {
                edges.push((u, v));
            }
        }
    }
    let adjacency = SparseAdjacency::from_edges(n, &edges)?;

    let mut features = DenseMatrix::zeros(n, feat_dim);
    for i in 0..n {
        let mean0 = labels[i] as f64 * sep;
        for c in 0..feat_dim {
            let base = if c == 0 { mean0 } else { 0.0 };
            features.set(i, c, base + rng.normal());
        }
    }
    Ok(Dataset {
        name: format!("sbm-{blocks}x{per_block}"),
        features,
        adjacency: Some(adjacency),
        labels: Some(labels),
    })
}

/// Per-column standardization to zero mean and unit variance; constant
/// columns are left centered only.
pub fn standardize(x: &DenseMatrix) -> DenseMatrix {
    let (n, d) = x.shape();
    let mut out = x.clone();
    for c in 0..d {
        let mean: f64 = (0..n).map(|i| x.get(i, c)).sum::<f64>() / n as f64;
        let var: f64 = (0..n).map(|i| (x.get(i, c) - mean).powi(2)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        for i in 0..n {
            let centered = x.get(i, c) - mean;
            out.set(i, c, if std > 0.0 { centered / std } else { centered });
        }
    }
    out
}

// ── Run manifest ─────────────────────────────────────────────────────

/// Everything needed to reproduce a run bit-identically with the same
/// binary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub software_version: String,
    pub dataset_name: String,
    pub dataset_fingerprint: String,
    pub seeds: Vec<u64>,
    pub model_config: AgcnConfig,
    pub train_config: TrainConfig,
}

impl RunManifest {
    pub fn new(
        dataset: &Dataset,
        seeds: &[u64],
        model_config: &AgcnConfig,
        train_config: &TrainConfig,
    ) -> Self {
        RunManifest {
            software_version: env!("CARGO_PKG_VERSION").to_string(),
            dataset_name: dataset.name.clone(),
            dataset_fingerprint: dataset.fingerprint(),
            seeds: seeds.to_vec(),
            model_config: model_config.clone(),
            train_config: train_config.clone(),
        }
    }
}
