//! Score predicted labelings against ground truth and aggregate several
//! runs into a mean±std report.
//!
//! ```bash
//! cargo run -p agcn --example metrics_report
//! ```

use agcn::metrics::{self, RunMetrics};

fn main() {
    let y_true = vec![0, 0, 0, 1, 1, 1, 2, 2, 2];

    // predictions use their own cluster ids; the metrics absorb renaming
    let perfect = vec![7, 7, 7, 4, 4, 4, 9, 9, 9];
    let one_off = vec![7, 7, 7, 4, 4, 9, 9, 9, 9];
    let collapsed = vec![0, 0, 0, 0, 0, 0, 1, 1, 1];

    for (name, pred) in [
        ("perfect (relabeled)", &perfect),
        ("one mistake", &one_off),
        ("two clusters merged", &collapsed),
    ] {
        let m = metrics::run_metrics(&y_true, pred).unwrap();
        println!(
            "{name:<22} ACC {:.3}  NMI {:.3}  ARI {:.3}  F1 {:.3}",
            m.acc, m.nmi, m.ari, m.f1
        );
    }

    let runs = vec![
        RunMetrics { acc: 0.80, nmi: 0.71, ari: 0.65, f1: 0.79 },
        RunMetrics { acc: 0.82, nmi: 0.74, ari: 0.69, f1: 0.81 },
        RunMetrics { acc: 0.81, nmi: 0.72, ari: 0.66, f1: 0.80 },
    ];
    let report = metrics::aggregate(&runs).unwrap();
    println!("\naggregated over {} runs (percent scale):", runs.len());
    println!(
        "ACC {}  NMI {}  ARI {}  F1 {}",
        report.acc.format_percent(),
        report.nmi.format_percent(),
        report.ari.format_percent(),
        report.f1.format_percent()
    );
}
