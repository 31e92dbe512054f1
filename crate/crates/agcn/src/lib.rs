//! Self-supervised graph clustering built from an auto-encoder and a graph
//! convolutional stack whose features are fused by learned attention, both
//! across feature kind (attribute vs. topology) and across layer scale.
//!
//! The crate is organized bottom-up:
//!
//! - [`matrix`] / [`tape`] — dense 64-bit matrices and reverse-mode
//!   automatic differentiation over them;
//! - [`graph`] — CSR adjacency storage, symmetric normalization and sparse
//!   propagation;
//! - [`knn`] — k'-nearest-neighbor graph construction for non-graph data;
//! - [`kmeans`] — centroid initialization and a standalone baseline;
//! - [`model`] — the clustering network forward pass and its losses;
//! - [`trainer`] — Adam, auto-encoder pretraining and joint self-supervised
//!   training;
//! - [`metrics`] — ACC / NMI / ARI / macro-F1 with optimal label matching;
//! - [`dataset`] — file formats, synthetic block-model data, run manifests;
//! - [`cli`] — the `agcn` command-line surface.
//!
//! See the crate examples for one runnable program per capability, and the
//! `acceptance` integration test for the end-to-end verification suite.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod gradcheck;
pub mod graph;
pub mod kmeans;
pub mod knn;
pub mod matrix;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod tape;
pub mod trainer;

pub use error::{AgcnError, Result};
pub use graph::SparseAdjacency;
pub use matrix::DenseMatrix;
pub use model::{AgcnConfig, AgcnParams};
pub use trainer::{TrainConfig, TrainOutcome};
