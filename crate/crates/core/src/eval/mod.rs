//! Evaluation protocol: stratified splits, a one-vs-all linear SVM, the
//! angle classifier and the repeated-split benchmark.

mod benchmark;
mod split;
mod svm;

use alloc::vec::Vec;

use crate::linalg::Matrix;
use crate::math;

pub use benchmark::{
    benchmark, fit_reducer, run_cell, run_repeat, BenchmarkConfig, BenchmarkRow, BenchmarkTable,
    Classifier, Method, MethodSpec, Reducer, SIGMA_FOLDS,
};
pub use split::{derive_seed, split, split_indices, stratified_folds, SplitPlan};
pub use svm::{
    select_c, svm_ova_train, svm_ova_train_with_loss, svm_predict, svm_train_cv, SvmLoss, SvmModel,
    C_GRID,
};

/// Axis with the smallest angle to each row: `argmax_k |y_k|`, or `argmax_k
/// y_k` when `signed`. Ties and all-zero rows go to the smallest index.
pub fn angle_classify(coords: &Matrix, signed: bool) -> Vec<usize> {
    (0..coords.rows())
        .map(|i| {
            let row = coords.row(i);
            if signed {
                svm::argmax(row)
            } else {
                let abs: Vec<f64> = row.iter().map(|&v| math::abs(v)).collect();
                svm::argmax(&abs)
            }
        })
        .collect()
}

/// Percentage of positions where `pred` equals `truth`.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let hits = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    100.0 * hits as f64 / truth.len() as f64
}

/// Mean and sample standard deviation.
pub fn mean_sd(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, math::sqrt(var))
}
