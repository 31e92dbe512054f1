//! Clustering evaluation: accuracy under the optimal cluster-to-class
//! assignment, normalized mutual information, adjusted Rand index, macro
//! F1, and multi-run mean±std aggregation.
//!
//! All four metrics are invariant under relabeling of the predicted
//! clusters; accuracy and F1 obtain this by solving a linear assignment
//! over the contingency table.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{AgcnError, Result};
use crate::matrix::DenseMatrix;

/// Joint label-count table. Rows index predicted clusters, columns index
/// true classes, both in sorted label order.
#[derive(Clone, Debug)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<usize>>,
    pub n: usize,
}

impl ContingencyTable {
    pub fn from_labels(y_true: &[usize], y_pred: &[usize]) -> Result<Self> {
        if y_true.len() != y_pred.len() {
            return Err(AgcnError::Validation(format!(
                "label lengths disagree: {} true vs {} predicted",
                y_true.len(),
                y_pred.len()
            )));
        }
        if y_true.is_empty() {
            return Err(AgcnError::InvalidArgument("empty labelings".into()));
        }
        let true_ids = index_labels(y_true);
        let pred_ids = index_labels(y_pred);
        let mut counts = vec![vec![0usize; true_ids.len()]; pred_ids.len()];
        for (t, p) in y_true.iter().zip(y_pred) {
            counts[pred_ids[p]][true_ids[t]] += 1;
        }
        Ok(ContingencyTable {
            counts,
            n: y_true.len(),
        })
    }

    pub fn pred_clusters(&self) -> usize {
        self.counts.len()
    }

    pub fn true_classes(&self) -> usize {
        self.counts[0].len()
    }

    fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    fn col_sums(&self) -> Vec<usize> {
        let mut sums = vec![0usize; self.true_classes()];
        for row in &self.counts {
            for (s, &c) in sums.iter_mut().zip(row) {
                *s += c;
            }
        }
        sums
    }

    /// True when both labelings induce exactly the same partition.
    fn partitions_identical(&self) -> bool {
        self.counts
            .iter()
            .all(|row| row.iter().filter(|&&c| c > 0).count() == 1)
            && self
                .col_sums()
                .iter()
                .zip(transpose_nonzero_counts(&self.counts))
                .all(|(_, nz)| nz == 1)
    }
}

fn transpose_nonzero_counts(counts: &[Vec<usize>]) -> Vec<usize> {
    let cols = counts[0].len();
    (0..cols)
        .map(|j| counts.iter().filter(|row| row[j] > 0).count())
        .collect()
}

fn index_labels(labels: &[usize]) -> BTreeMap<usize, usize> {
    let mut map = BTreeMap::new();
    for &l in labels {
        let next = map.len();
        map.entry(l).or_insert(next);
    }
    // re-number in sorted label order for determinism
    let mut sorted = BTreeMap::new();
    for (idx, (&label, _)) in map.iter().enumerate() {
        sorted.insert(label, idx);
    }
    sorted
}

// ── Linear assignment ────────────────────────────────────────────────

/// Minimum-cost assignment over a square cost matrix (Kuhn–Munkres family,
/// implemented as shortest augmenting paths with potentials). Among
/// cost-equal optima the lexicographically smallest row→column permutation
/// is returned, so ties break deterministically.
pub fn hungarian_assignment(cost: &DenseMatrix) -> Result<Vec<usize>> {
    let (rows, cols) = cost.shape();
    if rows != cols {
        return Err(AgcnError::InvalidArgument(format!(
            "assignment needs a square matrix, got {}",
            cost.shape_str()
        )));
    }
    if !cost.all_finite() {
        return Err(AgcnError::Validation("assignment costs must be finite".into()));
    }
    let n = rows;
    if n == 0 {
        return Err(AgcnError::InvalidArgument("empty cost matrix".into()));
    }
    let best = solve_min_cost(cost, &(0..n).collect::<Vec<_>>(), &(0..n).collect::<Vec<_>>());
    let tol = 1e-9 * (1.0 + best.abs());

    // Fix rows one by one to the smallest feasible column.
    let mut chosen = vec![usize::MAX; n];
    let mut used_col = vec![false; n];
    let mut fixed_cost = 0.0;
    for i in 0..n {
        let free_rows: Vec<usize> = (i + 1..n).collect();
        for c in 0..n {
            if used_col[c] {
                continue;
            }
            let free_cols: Vec<usize> = (0..n).filter(|&j| !used_col[j] && j != c).collect();
            let sub = solve_min_cost(cost, &free_rows, &free_cols);
            if fixed_cost + cost.get(i, c) + sub <= best + tol {
                chosen[i] = c;
                used_col[c] = true;
                fixed_cost += cost.get(i, c);
                break;
            }
        }
        debug_assert!(chosen[i] != usize::MAX);
    }
    Ok(chosen)
}

/// Optimal assignment cost restricted to the given rows/columns.
fn solve_min_cost(cost: &DenseMatrix, rows: &[usize], cols: &[usize]) -> f64 {
    let n = rows.len();
    debug_assert_eq!(n, cols.len());
    if n == 0 {
        return 0.0;
    }
    // Shortest augmenting path with potentials, 1-indexed scratch arrays.
    const INF: f64 = f64::INFINITY;
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut assigned_row = vec![0usize; n + 1]; // column -> row (1-indexed)
    let mut path = vec![0usize; n + 1];

    for i in 1..=n {
        assigned_row[0] = i;
        let mut j0 = 0usize;
        let mut min_v = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = assigned_row[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost.get(rows[i0 - 1], cols[j - 1]) - u[i0] - v[j];
                if cur < min_v[j] {
                    min_v[j] = cur;
                    path[j] = j0;
                }
                if min_v[j] < delta {
                    delta = min_v[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[assigned_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_v[j] -= delta;
                }
            }
            j0 = j1;
            if assigned_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = path[j0];
            assigned_row[j0] = assigned_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n)
        .map(|j| cost.get(rows[assigned_row[j] - 1], cols[j - 1]))
        .sum()
}

/// Assignment of predicted clusters to true classes that maximizes matched
/// counts. Surplus entries (padding when cluster counts differ) map beyond
/// the real classes.
fn optimal_cluster_mapping(table: &ContingencyTable) -> Result<Vec<usize>> {
    let size = table.pred_clusters().max(table.true_classes());
    let mut cost = DenseMatrix::zeros(size, size);
    for (p, row) in table.counts.iter().enumerate() {
        for (t, &c) in row.iter().enumerate() {
            cost.set(p, t, -(c as f64));
        }
    }
    hungarian_assignment(&cost)
}

// ── Metrics ──────────────────────────────────────────────────────────

pub fn accuracy(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    let table = ContingencyTable::from_labels(y_true, y_pred)?;
    let mapping = optimal_cluster_mapping(&table)?;
    let matched: usize = table
        .counts
        .iter()
        .enumerate()
        .map(|(p, row)| row.get(mapping[p]).copied().unwrap_or(0))
        .sum();
    Ok(matched as f64 / table.n as f64)
}

/// Normalized mutual information with the arithmetic-mean normalizer
/// `2·I(T;P) / (H(T) + H(P))`, natural logarithms throughout. Two
/// single-cluster identical partitions score 1; a zero-entropy side against
/// a differing partition scores 0.
pub fn nmi(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    let table = ContingencyTable::from_labels(y_true, y_pred)?;
    let n = table.n as f64;
    let rows = table.row_sums();
    let cols = table.col_sums();
    let h_pred = entropy(&rows, n);
    let h_true = entropy(&cols, n);
    if h_pred + h_true == 0.0 {
        // both partitions are a single cluster: identical by construction
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for (p, row) in table.counts.iter().enumerate() {
        for (t, &c) in row.iter().enumerate() {
            if c > 0 {
                let joint = c as f64 / n;
                mi += joint * (joint * n * n / (rows[p] as f64 * cols[t] as f64)).ln();
            }
        }
    }
    Ok((2.0 * mi / (h_true + h_pred)).clamp(0.0, 1.0))
}

fn entropy(counts: &[usize], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Adjusted Rand index over the contingency table's pair counts. The
/// degenerate case (expected index equals the maximum) scores 1 for
/// identical partitions and 0 otherwise.
pub fn ari(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    let table = ContingencyTable::from_labels(y_true, y_pred)?;
    let choose2 = |x: usize| (x * x.saturating_sub(1)) as f64 / 2.0;
    let index: f64 = table
        .counts
        .iter()
        .flat_map(|row| row.iter())
        .map(|&c| choose2(c))
        .sum();
    let sum_rows: f64 = table.row_sums().into_iter().map(choose2).sum();
    let sum_cols: f64 = table.col_sums().into_iter().map(choose2).sum();
    let total_pairs = choose2(table.n);
    let expected = if total_pairs > 0.0 {
        sum_rows * sum_cols / total_pairs
    } else {
        0.0
    };
    let max_index = (sum_rows + sum_cols) / 2.0;
    if (max_index - expected).abs() < 1e-12 {
        return Ok(if table.partitions_identical() { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max_index - expected))
}

/// Macro F1 after mapping predicted clusters to classes by the
/// accuracy-optimal assignment. Classes without any true or predicted
/// positives contribute zero; surplus clusters count as errors.
pub fn macro_f1(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    let table = ContingencyTable::from_labels(y_true, y_pred)?;
    let mapping = optimal_cluster_mapping(&table)?;
    let true_ids = index_labels(y_true);
    let pred_ids = index_labels(y_pred);
    let k_true = true_ids.len();

    let mapped: Vec<usize> = y_pred.iter().map(|p| mapping[pred_ids[p]]).collect();
    let truth: Vec<usize> = y_true.iter().map(|t| true_ids[t]).collect();

    let mut f1_sum = 0.0;
    for class in 0..k_true {
        let mut tp = 0usize;
        let mut fp = 0usize;
        let mut fn_ = 0usize;
        for (&t, &m) in truth.iter().zip(&mapped) {
            match (t == class, m == class) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => {}
            }
        }
        if tp > 0 {
            let precision = tp as f64 / (tp + fp) as f64;
            let recall = tp as f64 / (tp + fn_) as f64;
            f1_sum += 2.0 * precision * recall / (precision + recall);
        }
    }
    Ok(f1_sum / k_true as f64)
}

/// The four metrics of one run, each in [0, 1] (ARI may dip slightly
/// negative).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunMetrics {
    pub acc: f64,
    pub nmi: f64,
    pub ari: f64,
    pub f1: f64,
}

pub fn run_metrics(y_true: &[usize], y_pred: &[usize]) -> Result<RunMetrics> {
    Ok(RunMetrics {
        acc: accuracy(y_true, y_pred)?,
        nmi: nmi(y_true, y_pred)?,
        ari: ari(y_true, y_pred)?,
        f1: macro_f1(y_true, y_pred)?,
    })
}

/// Mean, population standard deviation and the raw per-run values of one
/// metric.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
    pub runs: Vec<f64>,
}

impl MetricSummary {
    pub fn from_values(values: Vec<f64>) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        MetricSummary {
            mean,
            std: var.sqrt(),
            runs: values,
        }
    }

    /// `mean±std` at two decimals, in the scale of the stored values.
    pub fn format(&self) -> String {
        format!("{:.2}\u{b1}{:.2}", self.mean, self.std)
    }

    /// `mean±std` at two decimals on the percent scale.
    pub fn format_percent(&self) -> String {
        format!("{:.2}\u{b1}{:.2}", 100.0 * self.mean, 100.0 * self.std)
    }
}

/// Conventions baked into the reported numbers, recorded so results can be
/// compared against other tools without guessing.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub nmi_normalizer: String,
    pub f1_mapping: String,
    /// Which iteration the reported metrics come from.
    pub selection: String,
    /// Mean of the per-seed best-iteration values, for comparison with the
    /// final-iteration report.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_mean: Option<RunMetrics>,
}

impl Default for ReportMetadata {
    fn default() -> Self {
        ReportMetadata {
            nmi_normalizer: "arithmetic-mean-of-entropies".into(),
            f1_mapping: "accuracy-optimal-assignment".into(),
            selection: "final-iteration".into(),
            best_mean: None,
        }
    }
}

/// Multi-run aggregation of the four metrics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusteringReport {
    pub acc: MetricSummary,
    pub nmi: MetricSummary,
    pub ari: MetricSummary,
    pub f1: MetricSummary,
    pub metadata: ReportMetadata,
}

pub fn aggregate(runs: &[RunMetrics]) -> Result<ClusteringReport> {
    if runs.is_empty() {
        return Err(AgcnError::InvalidArgument("no runs to aggregate".into()));
    }
    Ok(ClusteringReport {
        acc: MetricSummary::from_values(runs.iter().map(|r| r.acc).collect()),
        nmi: MetricSummary::from_values(runs.iter().map(|r| r.nmi).collect()),
        ari: MetricSummary::from_values(runs.iter().map(|r| r.ari).collect()),
        f1: MetricSummary::from_values(runs.iter().map(|r| r.f1).collect()),
        metadata: ReportMetadata::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use proptest::prelude::*;

    /// Exhaustive search over all permutations, scanning in lexicographic
    /// order and keeping strictly better costs, so the winner is the
    /// lexicographically first optimum.
    fn brute_force_assignment(cost: &DenseMatrix) -> (Vec<usize>, f64) {
        let n = cost.rows();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best_perm = perm.clone();
        let mut best_cost = f64::INFINITY;
        loop {
            let total: f64 = perm.iter().enumerate().map(|(i, &c)| cost.get(i, c)).sum();
            if total < best_cost - 1e-12 {
                best_cost = total;
                best_perm = perm.clone();
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
        (best_perm, best_cost)
    }

    fn next_permutation(perm: &mut [usize]) -> bool {
        let n = perm.len();
        if n < 2 {
            return false;
        }
        let mut i = n - 1;
        while i > 0 && perm[i - 1] >= perm[i] {
            i -= 1;
        }
        if i == 0 {
            return false;
        }
        let mut j = n - 1;
        while perm[j] <= perm[i - 1] {
            j -= 1;
        }
        perm.swap(i - 1, j);
        perm[i..].reverse();
        true
    }

    #[test]
    fn hungarian_identity_and_singleton() {
        let mut cost = DenseMatrix::filled(3, 3, 1.0);
        for i in 0..3 {
            cost.set(i, i, 0.0);
        }
        assert_eq!(hungarian_assignment(&cost).unwrap(), vec![0, 1, 2]);
        let one = DenseMatrix::filled(1, 1, 5.0);
        assert_eq!(hungarian_assignment(&one).unwrap(), vec![0]);
    }

    #[test]
    fn hungarian_rejects_non_square() {
        assert!(hungarian_assignment(&DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn hungarian_matches_brute_force_on_random_integer_costs() {
        let mut rng = Rng::new(77);
        for trial in 0..40 {
            let n = 2 + rng.index(5); // up to 6x6
            let mut cost = DenseMatrix::zeros(n, n);
            for v in cost.data_mut() {
                *v = rng.index(20) as f64;
            }
            let got = hungarian_assignment(&cost).unwrap();
            let (expect_perm, expect_cost) = brute_force_assignment(&cost);
            let got_cost: f64 = got.iter().enumerate().map(|(i, &c)| cost.get(i, c)).sum();
            assert_eq!(got_cost, expect_cost, "trial {trial}");
            assert_eq!(got, expect_perm, "trial {trial}: tie-break mismatch");
        }
    }

    #[test]
    fn hungarian_matches_brute_force_up_to_seven() {
        let mut rng = Rng::new(123);
        for n in 2..=7 {
            for _ in 0..5 {
                let mut cost = DenseMatrix::zeros(n, n);
                for v in cost.data_mut() {
                    *v = rng.uniform(-5.0, 5.0);
                }
                let got = hungarian_assignment(&cost).unwrap();
                let (_, expect_cost) = brute_force_assignment(&cost);
                let got_cost: f64 = got.iter().enumerate().map(|(i, &c)| cost.get(i, c)).sum();
                assert!((got_cost - expect_cost).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn accuracy_hand_cases() {
        assert_eq!(accuracy(&[0, 1, 2], &[0, 1, 2]).unwrap(), 1.0);
        // permuted labels are absorbed by the assignment
        assert_eq!(accuracy(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap(), 1.0);
        assert_eq!(accuracy(&[0, 0, 1, 1], &[0, 1, 1, 1]).unwrap(), 0.75);
    }

    #[test]
    fn nmi_hand_cases() {
        assert_eq!(nmi(&[0, 1, 0, 1], &[1, 0, 1, 0]).unwrap(), 1.0);
        // constant prediction against balanced truth: zero information
        assert_eq!(nmi(&[0, 0, 1, 1], &[2, 2, 2, 2]).unwrap(), 0.0);

        // direct entropy/MI evaluation for [[1,1],[0,2]] (pred x true)
        let got = nmi(&[0, 0, 1, 1], &[0, 1, 1, 1]).unwrap();
        let n = 4.0f64;
        let mi = (1.0 / n) * ((1.0 * n) / (1.0 * 2.0f64)).ln()
            + (1.0 / n) * ((1.0 * n) / (3.0 * 2.0f64)).ln()
            + (2.0 / n) * ((2.0 * n) / (3.0 * 2.0f64)).ln();
        let h_true = -(0.5f64.ln());
        let h_pred = -(0.25 * 0.25f64.ln() + 0.75 * 0.75f64.ln());
        let expect = 2.0 * mi / (h_true + h_pred);
        assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
    }

    #[test]
    fn ari_hand_and_degenerate_cases() {
        assert_eq!(ari(&[0, 1, 0, 1], &[1, 0, 1, 0]).unwrap(), 1.0);
        assert_eq!(ari(&[3], &[9]).unwrap(), 1.0);
        // all singletons vs all singletons: degenerate, identical
        assert_eq!(ari(&[0, 1, 2], &[5, 6, 7]).unwrap(), 1.0);
        // one side constant: degenerate, different
        assert_eq!(ari(&[0, 1], &[0, 0]).unwrap(), 0.0);
    }

    #[test]
    fn ari_matches_pair_counting_oracle() {
        let mut rng = Rng::new(31);
        for _ in 0..100 {
            let n = 12;
            let y1: Vec<usize> = (0..n).map(|_| rng.index(3)).collect();
            let y2: Vec<usize> = (0..n).map(|_| rng.index(4)).collect();
            let got = ari(&y1, &y2).unwrap();

            // O(n^2) agreement counting over all pairs
            let mut a = 0.0f64; // same in both
            let mut b = 0.0f64; // same in 1, split in 2
            let mut c = 0.0f64; // split in 1, same in 2
            let mut d = 0.0f64; // split in both
            for i in 0..n {
                for j in (i + 1)..n {
                    match (y1[i] == y1[j], y2[i] == y2[j]) {
                        (true, true) => a += 1.0,
                        (true, false) => b += 1.0,
                        (false, true) => c += 1.0,
                        (false, false) => d += 1.0,
                    }
                }
            }
            let total = a + b + c + d;
            let expected = (a + b) * (a + c) / total;
            let max = ((a + b) + (a + c)) / 2.0;
            if (max - expected).abs() < 1e-12 {
                continue;
            }
            let oracle = (a - expected) / (max - expected);
            assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
        }
    }

    #[test]
    fn macro_f1_hand_cases() {
        assert_eq!(macro_f1(&[0, 1, 0, 1], &[0, 1, 0, 1]).unwrap(), 1.0);
        assert_eq!(macro_f1(&[0, 1, 0, 1], &[1, 0, 1, 0]).unwrap(), 1.0);
        // collapsed prediction: cluster 0 -> class 0, class 1 unserved
        let got = macro_f1(&[0, 0, 1, 1], &[0, 0, 0, 0]).unwrap();
        assert!((got - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn identity_metrics_are_one() {
        let y = [0, 2, 2, 1, 0, 1, 2];
        assert_eq!(accuracy(&y, &y).unwrap(), 1.0);
        assert_eq!(nmi(&y, &y).unwrap(), 1.0);
        assert_eq!(ari(&y, &y).unwrap(), 1.0);
        assert_eq!(macro_f1(&y, &y).unwrap(), 1.0);
    }

    #[test]
    fn ari_of_random_labelings_centers_on_zero() {
        let mut rng = Rng::new(99);
        let mut sum = 0.0;
        let trials = 200;
        for _ in 0..trials {
            let y1: Vec<usize> = (0..50).map(|_| rng.index(3)).collect();
            let y2: Vec<usize> = (0..50).map(|_| rng.index(3)).collect();
            sum += ari(&y1, &y2).unwrap();
        }
        let mean = sum / trials as f64;
        assert!(mean.abs() < 0.05, "mean ARI of random labelings: {mean}");
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(accuracy(&[0, 1], &[0]).is_err());
        assert!(nmi(&[0, 1], &[0]).is_err());
        assert!(ari(&[0, 1], &[0]).is_err());
        assert!(macro_f1(&[0, 1], &[0]).is_err());
    }

    #[test]
    fn aggregate_hand_cases() {
        let single = aggregate(&[RunMetrics { acc: 0.5, nmi: 0.5, ari: 0.5, f1: 0.5 }]).unwrap();
        assert_eq!(single.acc.std, 0.0);

        let two = aggregate(&[
            RunMetrics { acc: 80.0, nmi: 80.0, ari: 80.0, f1: 80.0 },
            RunMetrics { acc: 82.0, nmi: 82.0, ari: 82.0, f1: 82.0 },
        ])
        .unwrap();
        assert_eq!(two.acc.format(), "81.00\u{b1}1.00");

        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn aggregate_matches_direct_formula_recomputation() {
        let mut rng = Rng::new(7);
        let runs: Vec<RunMetrics> = (0..10)
            .map(|_| RunMetrics {
                acc: rng.next_f64(),
                nmi: rng.next_f64(),
                ari: rng.next_f64(),
                f1: rng.next_f64(),
            })
            .collect();
        let report = aggregate(&runs).unwrap();
        let values: Vec<f64> = runs.iter().map(|r| r.acc).collect();
        let mean = values.iter().sum::<f64>() / 10.0;
        let std = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 10.0).sqrt();
        assert!((report.acc.mean - mean).abs() < 1e-15);
        assert!((report.acc.std - std).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn metrics_invariant_under_prediction_relabeling(
            labels in proptest::collection::vec(0usize..4, 4..40),
            offset in 1usize..7,
        ) {
            let y_true: Vec<usize> = labels.iter().map(|&l| l % 3).collect();
            let y_pred = labels.clone();
            // relabel predictions by an injective map
            let remapped: Vec<usize> = y_pred.iter().map(|&l| (l * 13 + offset) % 29).collect();
            prop_assert!((accuracy(&y_true, &y_pred).unwrap() - accuracy(&y_true, &remapped).unwrap()).abs() < 1e-12);
            prop_assert!((nmi(&y_true, &y_pred).unwrap() - nmi(&y_true, &remapped).unwrap()).abs() < 1e-12);
            prop_assert!((ari(&y_true, &y_pred).unwrap() - ari(&y_true, &remapped).unwrap()).abs() < 1e-12);
            prop_assert!((macro_f1(&y_true, &y_pred).unwrap() - macro_f1(&y_true, &remapped).unwrap()).abs() < 1e-12);
        }
    }
}
