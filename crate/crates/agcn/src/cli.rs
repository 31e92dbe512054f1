//! The `agcn` command-line surface.
//!
//! Subcommands: `train`, `pretrain`, `build-knn`, `eval`, `synth`,
//! `ablate`. Exit codes: 0 success, 1 usage error, 2 data validation
//! error, 3 numerical failure. `AGCN_THREADS` caps how many seeds run in
//! parallel.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use crate::dataset::{self, Dataset, RunManifest};
use crate::error::{AgcnError, Result};
use crate::knn::{self, KnnConfig, KnnMetric};
use crate::metrics::{self, ClusteringReport, RunMetrics};
use crate::model::{AgcnConfig, AgcnParams};
use crate::trainer::{self, TrainConfig, TrainOutcome};

#[derive(Parser)]
#[command(
    name = "agcn",
    version,
    about = "Attention-fused graph clustering: train, evaluate and ablate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train end to end and write trace, report, labels and embeddings.
    Train(TrainArgs),
    /// Pretrain the auto-encoder alone and write a checkpoint.
    Pretrain(PretrainArgs),
    /// Build a k'-nearest-neighbor edge list from a feature matrix.
    BuildKnn(BuildKnnArgs),
    /// Compare two label files with ACC / NMI / ARI / F1.
    Eval(EvalArgs),
    /// Generate a synthetic block-model dataset.
    Synth(SynthArgs),
    /// Run the four fusion configurations and compare them.
    Ablate(AblateArgs),
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Feature matrix file (`n d` header, then rows).
    #[arg(long)]
    features: PathBuf,
    /// Edge-list graph file; omitted, a k'NN graph is built from features.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Ground-truth labels, one integer per line.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Standardize each feature column before training.
    #[arg(long)]
    standardize: bool,
    /// Neighbor count for the k'NN fallback graph.
    #[arg(long)]
    k_prime: Option<usize>,
    /// Distance metric for the k'NN fallback graph.
    #[arg(long, value_enum, default_value_t = KnnMetric::Euclidean)]
    knn_metric: KnnMetric,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Hidden layer widths, e.g. `500,500,2000,10`.
    #[arg(long)]
    dims: Option<String>,
    /// Cluster count; defaults to the number of distinct labels.
    #[arg(short, long)]
    k: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Trade-off presets from the per-dataset-family settings.
    #[arg(long, value_enum)]
    lambda_preset: Option<LambdaPreset>,
    #[arg(long)]
    lambda1: Option<f64>,
    #[arg(long)]
    lambda2: Option<f64>,
    /// Disable heterogeneity-wise attention fusion.
    #[arg(long)]
    no_agcnh: bool,
    /// Disable the multi-scale concatenation.
    #[arg(long)]
    no_agcns_concat: bool,
    /// Disable attention weighting of the multi-scale blocks.
    #[arg(long)]
    no_agcns_attention: bool,
    #[arg(long)]
    leaky_slope: Option<f64>,
    /// JSON config file mirroring the model/train field names.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct TrainTuning {
    #[arg(long)]
    pretrain_epochs: Option<usize>,
    #[arg(long)]
    pretrain_lr: Option<f64>,
    #[arg(long)]
    pretrain_batch: Option<usize>,
    #[arg(long)]
    joint_lr: Option<f64>,
    /// Joint-phase iteration count.
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    eval_every: Option<usize>,
    /// Comma-separated seed list; one full run per seed.
    #[arg(long, default_value = "0")]
    seeds: String,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    tuning: TrainTuning,
    /// Output directory.
    #[arg(long, default_value = "agcn-out")]
    out: PathBuf,
}

#[derive(Args)]
struct PretrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    tuning: TrainTuning,
    #[arg(long, default_value = "agcn-out")]
    out: PathBuf,
}

#[derive(Args)]
struct BuildKnnArgs {
    #[arg(long)]
    features: PathBuf,
    /// Output edge-list path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 3)]
    k_prime: usize,
    #[arg(long, value_enum, default_value_t = KnnMetric::Euclidean)]
    metric: KnnMetric,
    /// Build one graph per k' in this comma-separated sweep, suffixing the
    /// output name, e.g. `--sweep 1,3,5`.
    #[arg(long)]
    sweep: Option<String>,
}

#[derive(Args)]
struct EvalArgs {
    /// Ground-truth label file.
    #[arg(long = "true")]
    true_labels: PathBuf,
    /// Predicted label file.
    #[arg(long = "pred")]
    pred_labels: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value = "agcn-synth")]
    out: PathBuf,
    #[arg(long, default_value_t = 2)]
    blocks: usize,
    #[arg(long, default_value_t = 30)]
    per_block: usize,
    #[arg(long, default_value_t = 0.5)]
    p_in: f64,
    #[arg(long, default_value_t = 0.02)]
    p_out: f64,
    #[arg(long, default_value_t = 2)]
    feat_dim: usize,
    /// Distance between adjacent block means (feature units = std devs).
    #[arg(long, default_value_t = 10.0)]
    sep: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct AblateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    tuning: TrainTuning,
    #[arg(long, default_value = "agcn-out")]
    out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum LambdaPreset {
    /// λ₁ = λ₂ = 1000 (image-style data).
    Usps,
    /// λ₁ = 1, λ₂ = 0.1 (sensor-record-style data).
    Hhar,
    /// λ₁ = λ₂ = 10 (text-style data).
    Reuters,
    /// λ₁ = 0.1, λ₂ = 0.01 (native graph data).
    Graph,
}

impl LambdaPreset {
    fn values(self) -> (f64, f64) {
        match self {
            LambdaPreset::Usps => (1000.0, 1000.0),
            LambdaPreset::Hhar => (1.0, 0.1),
            LambdaPreset::Reuters => (10.0, 10.0),
            LambdaPreset::Graph => (0.1, 0.01),
        }
    }
}

// ── Config file ──────────────────────────────────────────────────────

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct PartialModelConfig {
    layer_dims: Option<Vec<usize>>,
    k: Option<usize>,
    alpha: Option<f64>,
    lambda1: Option<f64>,
    lambda2: Option<f64>,
    use_agcnh: Option<bool>,
    use_agcns_concat: Option<bool>,
    use_agcns_attention: Option<bool>,
    leaky_slope: Option<f64>,
    seed: Option<u64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct PartialTrainConfig {
    pretrain_epochs: Option<usize>,
    pretrain_lr: Option<f64>,
    pretrain_batch: Option<usize>,
    joint_lr: Option<f64>,
    max_iters: Option<usize>,
    seed: Option<u64>,
    eval_every: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    model: PartialModelConfig,
    #[serde(default)]
    train: PartialTrainConfig,
}

fn load_config_file(path: Option<&Path>) -> Result<ConfigFile> {
    match path {
        None => Ok(ConfigFile::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text)
                .map_err(|e| AgcnError::Validation(format!("{}: {e}", p.display())))
        }
    }
}

// ── Entry point ──────────────────────────────────────────────────────

/// Parse and run; returns the process exit code instead of exiting so
/// tests can drive the CLI in-process.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Train(args) => run_train(args),
        Command::Pretrain(args) => run_pretrain(args),
        Command::BuildKnn(args) => run_build_knn(args),
        Command::Eval(args) => run_eval(args),
        Command::Synth(args) => run_synth(args),
        Command::Ablate(args) => run_ablate(args),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

// ── Shared plumbing ──────────────────────────────────────────────────

fn parse_usize_list(text: &str, what: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| AgcnError::InvalidArgument(format!("bad {what} entry {t:?}: {e}")))
        })
        .collect()
}

fn parse_seed_list(text: &str) -> Result<Vec<u64>> {
    let seeds: Vec<u64> = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|e| AgcnError::InvalidArgument(format!("bad seed {t:?}: {e}")))
        })
        .collect::<Result<_>>()?;
    if seeds.is_empty() {
        return Err(AgcnError::InvalidArgument("empty seed list".into()));
    }
    Ok(seeds)
}

/// Load the dataset and attach a graph, building the k'NN fallback when no
/// edge list was supplied.
fn prepare_dataset(args: &DataArgs) -> Result<Dataset> {
    let mut ds = dataset::load_dataset(
        &args.features,
        args.graph.as_deref(),
        args.labels.as_deref(),
    )?;
    if args.standardize {
        ds.features = dataset::standardize(&ds.features);
    }
    if ds.adjacency.is_none() {
        let cfg = KnnConfig {
            k_prime: args.k_prime.unwrap_or(3),
            metric: args.knn_metric,
        };
        ds.adjacency = Some(knn::build_knn_graph(&ds.features, &cfg)?);
    }
    Ok(ds)
}

fn resolve_model_config(
    ds: &Dataset,
    args: &ModelArgs,
    file: &ConfigFile,
) -> Result<AgcnConfig> {
    let d = ds.features.cols();
    let k = args
        .k
        .or(file.model.k)
        .or_else(|| ds.class_count())
        .ok_or_else(|| {
            AgcnError::InvalidArgument("cluster count unknown: pass --k or provide labels".into())
        })?;
    let mut cfg = AgcnConfig::new(d, k);
    let pm = &file.model;
    if let Some(dims) = &pm.layer_dims {
        cfg.layer_dims = dims.clone();
    }
    if let Some(v) = pm.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = pm.lambda1 {
        cfg.lambda1 = v;
    }
    if let Some(v) = pm.lambda2 {
        cfg.lambda2 = v;
    }
    if let Some(v) = pm.use_agcnh {
        cfg.use_agcnh = v;
    }
    if let Some(v) = pm.use_agcns_concat {
        cfg.use_agcns_concat = v;
    }
    if let Some(v) = pm.use_agcns_attention {
        cfg.use_agcns_attention = v;
    }
    if let Some(v) = pm.leaky_slope {
        cfg.leaky_slope = v;
    }
    if let Some(v) = pm.seed {
        cfg.seed = v;
    }

    if let Some(dims) = &args.dims {
        let mut layer_dims = vec![d];
        layer_dims.extend(parse_usize_list(dims, "dims")?);
        cfg.layer_dims = layer_dims;
    }
    if let Some(v) = args.alpha {
        cfg.alpha = v;
    }
    if let Some(preset) = args.lambda_preset {
        let (l1, l2) = preset.values();
        cfg.lambda1 = l1;
        cfg.lambda2 = l2;
    }
    if let Some(v) = args.lambda1 {
        cfg.lambda1 = v;
    }
    if let Some(v) = args.lambda2 {
        cfg.lambda2 = v;
    }
    if args.no_agcnh {
        cfg.use_agcnh = false;
    }
    if args.no_agcns_concat {
        cfg.use_agcns_concat = false;
        cfg.use_agcns_attention = false;
    }
    if args.no_agcns_attention {
        cfg.use_agcns_attention = false;
    }
    if let Some(v) = args.leaky_slope {
        cfg.leaky_slope = v;
    }
    if cfg.layer_dims[0] != d {
        return Err(AgcnError::Validation(format!(
            "config layer_dims start with {}, but the data has {d} features",
            cfg.layer_dims[0]
        )));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn resolve_train_config(tuning: &TrainTuning, file: &ConfigFile) -> Result<TrainConfig> {
    let mut cfg = TrainConfig::default();
    let pt = &file.train;
    if let Some(v) = pt.pretrain_epochs {
        cfg.pretrain_epochs = v;
    }
    if let Some(v) = pt.pretrain_lr {
        cfg.pretrain_lr = v;
    }
    if let Some(v) = pt.pretrain_batch {
        cfg.pretrain_batch = v;
    }
    if let Some(v) = pt.joint_lr {
        cfg.joint_lr = v;
    }
    if let Some(v) = pt.max_iters {
        cfg.max_iters = v;
    }
    if let Some(v) = pt.seed {
        cfg.seed = v;
    }
    if let Some(v) = pt.eval_every {
        cfg.eval_every = v;
    }
    if let Some(v) = tuning.pretrain_epochs {
        cfg.pretrain_epochs = v;
    }
    if let Some(v) = tuning.pretrain_lr {
        cfg.pretrain_lr = v;
    }
    if let Some(v) = tuning.pretrain_batch {
        cfg.pretrain_batch = v;
    }
    if let Some(v) = tuning.joint_lr {
        cfg.joint_lr = v;
    }
    if let Some(v) = tuning.max_iters {
        cfg.max_iters = v;
    }
    if let Some(v) = tuning.eval_every {
        cfg.eval_every = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn thread_cap() -> usize {
    std::env::var("AGCN_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Run jobs with at most `AGCN_THREADS` running at once, preserving input
/// order in the results.
fn run_chunked<T, F>(jobs: Vec<F>) -> Vec<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    let cap = thread_cap().max(1);
    let mut results = Vec::with_capacity(jobs.len());
    let mut iter = jobs.into_iter();
    loop {
        let chunk: Vec<F> = iter.by_ref().take(cap).collect();
        if chunk.is_empty() {
            break;
        }
        let chunk_results: Vec<T> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk.into_iter().map(|job| scope.spawn(job)).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker thread panicked"))
                .collect()
        });
        results.extend(chunk_results);
    }
    results
}

/// One full training run per seed, in parallel, results in seed order.
fn train_over_seeds(
    ds: &Dataset,
    model_cfg: &AgcnConfig,
    train_cfg: &TrainConfig,
    seeds: &[u64],
) -> Result<Vec<TrainOutcome>> {
    let adjacency = ds
        .adjacency
        .as_ref()
        .ok_or_else(|| AgcnError::Validation("dataset has no graph".into()))?;
    let jobs: Vec<_> = seeds
        .iter()
        .map(|&seed| {
            let mut mc = model_cfg.clone();
            let mut tc = train_cfg.clone();
            mc.seed = seed;
            tc.seed = seed;
            let features = &ds.features;
            let labels = ds.labels.as_deref();
            move || trainer::train(features, adjacency, &mc, &tc, labels)
        })
        .collect();
    run_chunked(jobs).into_iter().collect()
}

fn final_metrics(outcomes: &[TrainOutcome]) -> Option<Vec<RunMetrics>> {
    outcomes
        .iter()
        .map(|o| o.trace.last_metrics())
        .collect::<Option<Vec<_>>>()
}

fn aggregate_with_best(outcomes: &[TrainOutcome]) -> Option<ClusteringReport> {
    let finals = final_metrics(outcomes)?;
    let mut report = metrics::aggregate(&finals).ok()?;
    let bests: Option<Vec<RunMetrics>> =
        outcomes.iter().map(|o| o.trace.best_metrics()).collect();
    if let Some(bests) = bests {
        let mean = |f: fn(&RunMetrics) -> f64| {
            bests.iter().map(&f).sum::<f64>() / bests.len() as f64
        };
        report.metadata.best_mean = Some(RunMetrics {
            acc: mean(|m| m.acc),
            nmi: mean(|m| m.nmi),
            ari: mean(|m| m.ari),
            f1: mean(|m| m.f1),
        });
    }
    Some(report)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn print_report_line(report: &ClusteringReport) {
    println!(
        "ACC {}  NMI {}  ARI {}  F1 {}",
        report.acc.format_percent(),
        report.nmi.format_percent(),
        report.ari.format_percent(),
        report.f1.format_percent()
    );
}

// ── Subcommand handlers ──────────────────────────────────────────────

fn run_train(args: TrainArgs) -> Result<()> {
    let file = load_config_file(args.model.config.as_deref())?;
    let ds = prepare_dataset(&args.data)?;
    let model_cfg = resolve_model_config(&ds, &args.model, &file)?;
    let train_cfg = resolve_train_config(&args.tuning, &file)?;
    let seeds = parse_seed_list(&args.tuning.seeds)?;

    std::fs::create_dir_all(&args.out)?;
    let outcomes = train_over_seeds(&ds, &model_cfg, &train_cfg, &seeds)?;

    for (seed, outcome) in seeds.iter().zip(&outcomes) {
        std::fs::write(
            args.out.join(format!("trace_seed{seed}.csv")),
            outcome.trace.to_csv(),
        )?;
        std::fs::write(
            args.out.join(format!("labels_seed{seed}.txt")),
            dataset::format_labels(&outcome.labels),
        )?;
        std::fs::write(
            args.out.join(format!("embedding_h_seed{seed}.txt")),
            dataset::format_matrix(&outcome.embedding),
        )?;
        std::fs::write(
            args.out.join(format!("embedding_z_seed{seed}.txt")),
            dataset::format_matrix(&outcome.prediction),
        )?;
    }

    let manifest = RunManifest::new(&ds, &seeds, &model_cfg, &train_cfg);
    write_json(&args.out.join("manifest.json"), &manifest)?;

    match aggregate_with_best(&outcomes) {
        Some(report) => {
            write_json(&args.out.join("report.json"), &report)?;
            println!(
                "trained {} ({} samples, {} seeds)",
                ds.name,
                ds.samples(),
                seeds.len()
            );
            print_report_line(&report);
        }
        None => {
            let report = json!({ "metadata": metrics::ReportMetadata::default() });
            write_json(&args.out.join("report.json"), &report)?;
            println!(
                "trained {} ({} samples, {} seeds); no labels, no metrics",
                ds.name,
                ds.samples(),
                seeds.len()
            );
        }
    }
    Ok(())
}

fn run_pretrain(args: PretrainArgs) -> Result<()> {
    let file = load_config_file(args.model.config.as_deref())?;
    let ds = prepare_dataset(&args.data)?;
    let model_cfg = resolve_model_config(&ds, &args.model, &file)?;
    let mut train_cfg = resolve_train_config(&args.tuning, &file)?;
    let seeds = parse_seed_list(&args.tuning.seeds)?;
    let seed = seeds[0];
    train_cfg.seed = seed;
    let mut model_cfg = model_cfg;
    model_cfg.seed = seed;

    let mut params = AgcnParams::init(&model_cfg)?;
    let losses = trainer::pretrain_ae(&ds.features, &mut params, &model_cfg, &train_cfg)?;

    std::fs::create_dir_all(&args.out)?;
    write_json(&args.out.join("ae_checkpoint.json"), &params)?;
    let mut csv = String::from("epoch,loss\n");
    for (epoch, loss) in losses.iter().enumerate() {
        csv.push_str(&format!("{},{}\n", epoch + 1, loss));
    }
    std::fs::write(args.out.join("pretrain_loss.csv"), csv)?;
    println!(
        "pretrained {} epochs; reconstruction loss {} -> {}",
        losses.len(),
        losses.first().unwrap_or(&0.0),
        losses.last().unwrap_or(&0.0)
    );
    Ok(())
}

fn run_build_knn(args: BuildKnnArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.features)?;
    let features = dataset::parse_matrix(&text, &args.features.display().to_string())?;
    let sweep = match &args.sweep {
        Some(list) => parse_usize_list(list, "sweep")?,
        None => vec![args.k_prime],
    };
    for &k in &sweep {
        let cfg = KnnConfig {
            k_prime: k,
            metric: args.metric,
        };
        let graph = knn::build_knn_graph(&features, &cfg)?;
        let path = if args.sweep.is_some() {
            suffixed_path(&args.out, &format!("_k{k}"))
        } else {
            args.out.clone()
        };
        std::fs::write(&path, graph.to_edge_list_string())?;
        println!(
            "wrote {} ({} nodes, {} edges, k'={k})",
            path.display(),
            graph.node_count(),
            graph.nnz() / 2
        );
    }
    Ok(())
}

fn suffixed_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    let ext = path
        .extension()
        .map(|e| format!(".{}", e.to_string_lossy()))
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}{ext}"))
}

fn run_eval(args: EvalArgs) -> Result<()> {
    let read_labels = |p: &Path| -> Result<Vec<usize>> {
        let text = std::fs::read_to_string(p)?;
        dataset::parse_labels(&text, &p.display().to_string())
    };
    let y_true = read_labels(&args.true_labels)?;
    let y_pred = read_labels(&args.pred_labels)?;
    let m = metrics::run_metrics(&y_true, &y_pred)?;
    let out = json!({ "acc": m.acc, "nmi": m.nmi, "ari": m.ari, "f1": m.f1 });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn run_synth(args: SynthArgs) -> Result<()> {
    let ds = dataset::generate_synthetic(
        args.blocks,
        args.per_block,
        args.p_in,
        args.p_out,
        args.feat_dim,
        args.sep,
        args.seed,
    )?;
    let written = dataset::save_dataset(&ds, &args.out)?;
    let edges = ds.adjacency.as_ref().map_or(0, |a| a.nnz() / 2);
    println!(
        "generated {} nodes / {} edges / {} features per node",
        ds.samples(),
        edges,
        ds.features.cols()
    );
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

/// The four fusion configurations, weakest to strongest.
fn ablation_grid() -> Vec<(&'static str, bool, bool, bool)> {
    vec![
        ("baseline", false, false, false),
        ("agcn-h", true, false, false),
        ("agcn-h+s", true, true, false),
        ("full", true, true, true),
    ]
}

fn run_ablate(args: AblateArgs) -> Result<()> {
    let file = load_config_file(args.model.config.as_deref())?;
    let ds = prepare_dataset(&args.data)?;
    if ds.labels.is_none() {
        return Err(AgcnError::Validation(
            "ablation needs ground-truth labels to compare configurations".into(),
        ));
    }
    let base_cfg = resolve_model_config(&ds, &args.model, &file)?;
    let train_cfg = resolve_train_config(&args.tuning, &file)?;
    let seeds = parse_seed_list(&args.tuning.seeds)?;

    let mut rows = Vec::new();
    println!(
        "{:<12} {:>14} {:>14} {:>14} {:>14}",
        "config", "ACC", "NMI", "ARI", "F1"
    );
    for (name, h, s, a) in ablation_grid() {
        let mut cfg = base_cfg.clone();
        cfg.use_agcnh = h;
        cfg.use_agcns_concat = s;
        cfg.use_agcns_attention = a;
        let outcomes = train_over_seeds(&ds, &cfg, &train_cfg, &seeds)?;
        let report = aggregate_with_best(&outcomes).ok_or_else(|| {
            AgcnError::Validation("ablation run produced no metrics".into())
        })?;
        println!(
            "{:<12} {:>14} {:>14} {:>14} {:>14}",
            name,
            report.acc.format_percent(),
            report.nmi.format_percent(),
            report.ari.format_percent(),
            report.f1.format_percent()
        );
        rows.push(json!({
            "name": name,
            "use_agcnh": h,
            "use_agcns_concat": s,
            "use_agcns_attention": a,
            "acc": report.acc,
            "nmi": report.nmi,
            "ari": report.ari,
            "f1": report.f1,
        }));
    }
    std::fs::create_dir_all(&args.out)?;
    let doc = json!({
        "dataset": ds.name,
        "seeds": seeds,
        "configurations": rows,
        "metadata": metrics::ReportMetadata::default(),
    });
    write_json(&args.out.join("ablate.json"), &doc)?;
    Ok(())
}
