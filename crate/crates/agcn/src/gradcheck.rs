//! Central finite-difference gradient checking.
//!
//! The checks here only ever evaluate forward losses, so they are
//! independent of the reverse-mode code paths they are used to verify.

use crate::matrix::DenseMatrix;

/// Central-difference gradient of `f` at `at`, one entry at a time.
pub fn fd_grad(mut f: impl FnMut(&DenseMatrix) -> f64, at: &DenseMatrix, h: f64) -> DenseMatrix {
    let mut grad = DenseMatrix::zeros(at.rows(), at.cols());
    let mut probe = at.clone();
    for idx in 0..at.data().len() {
        let orig = probe.data()[idx];
        probe.data_mut()[idx] = orig + h;
        let plus = f(&probe);
        probe.data_mut()[idx] = orig - h;
        let minus = f(&probe);
        probe.data_mut()[idx] = orig;
        grad.data_mut()[idx] = (plus - minus) / (2.0 * h);
    }
    grad
}

/// Worst-case entrywise relative error between two gradients. Entries where
/// both sides sit below `1e-6` are treated as matching zeros: central
/// differences bottom out near that scale in 64-bit arithmetic.
pub fn max_rel_err(analytic: &DenseMatrix, numeric: &DenseMatrix) -> f64 {
    assert_eq!(analytic.shape(), numeric.shape(), "gradient shape mismatch");
    let mut worst: f64 = 0.0;
    for (&a, &n) in analytic.data().iter().zip(numeric.data()) {
        let scale = a.abs().max(n.abs());
        if scale <= 1e-6 {
            continue;
        }
        worst = worst.max((a - n).abs() / scale);
    }
    worst
}
