use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::split::{derive_seed, stratified_folds};
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::math;

const MAX_EPOCHS: usize = 1000;
const GAP_TOL: f64 = 1e-4;

/// Candidate regularisation constants for cross-validation.
pub const C_GRID: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];

/// One-vs-all linear classifier. Row `k` of `weights` with `bias[k]` scores
/// class `k`; both act on unstandardised features.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub c: f64,
}

impl SvmModel {
    pub fn decision(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.weights.cols() {
            return Err(Error::DimensionMismatch {
                what: "svm input columns",
                expected: self.weights.cols(),
                found: x.cols(),
            });
        }
        let mut d = x.matmul_t(&self.weights);
        for i in 0..d.rows() {
            for (v, b) in d.row_mut(i).iter_mut().zip(&self.bias) {
                *v += b;
            }
        }
        Ok(d)
    }
}

/// Loss of the binary classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SvmLoss {
    /// `max(0, 1 − y f)`.
    Hinge,
    /// `max(0, 1 − y f)²`, the usual default of dual coordinate descent
    /// solvers.
    #[default]
    SquaredHinge,
}

/// Binary linear SVM on standardised, bias-augmented rows, solved in the
/// dual by coordinate descent until the relative duality gap is at most
/// `1e-4`. Returns the augmented weight vector.
fn train_binary(
    x: &[Vec<f64>],
    y: &[f64],
    c: f64,
    loss: SvmLoss,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let n = x.len();
    let p = x.first().map_or(0, Vec::len);
    let (diag, upper) = match loss {
        SvmLoss::Hinge => (0.0, c),
        SvmLoss::SquaredHinge => (0.5 / c, f64::INFINITY),
    };
    let qii: Vec<f64> = x.iter().map(|r| dot(r, r) + diag).collect();
    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; p];
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..MAX_EPOCHS {
        order.shuffle(rng);
        for &i in &order {
            let g = y[i] * dot(&w, &x[i]) - 1.0 + diag * alpha[i];
            let pg = if alpha[i] == 0.0 {
                g.min(0.0)
            } else if alpha[i] == upper {
                g.max(0.0)
            } else {
                g
            };
            if pg == 0.0 {
                continue;
            }
            let old = alpha[i];
            alpha[i] = (old - g / qii[i]).clamp(0.0, upper);
            let step = (alpha[i] - old) * y[i];
            for (wj, xj) in w.iter_mut().zip(&x[i]) {
                *wj += step * xj;
            }
        }
        let ww = dot(&w, &w);
        let mut total = 0.0;
        for (r, &yi) in x.iter().zip(y) {
            let m = (1.0 - yi * dot(&w, r)).max(0.0);
            total += match loss {
                SvmLoss::Hinge => m,
                SvmLoss::SquaredHinge => m * m,
            };
        }
        let primal = 0.5 * ww + c * total;
        let dual = alpha.iter().sum::<f64>()
            - 0.5 * ww
            - alpha.iter().map(|a| a * a).sum::<f64>() * diag * 0.5;
        if primal - dual <= GAP_TOL * primal.abs().max(1e-12) {
            break;
        }
    }
    w
}

/// Trains `K` one-vs-all classifiers with constant `c`.
///
/// Features are standardised internally and the bias is learned as the
/// weight of a constant feature; the returned model folds both back.
pub fn svm_ova_train(
    x: &Matrix,
    labels: &[usize],
    num_classes: usize,
    c: f64,
    seed: u64,
) -> Result<SvmModel> {
    svm_ova_train_with_loss(x, labels, num_classes, c, SvmLoss::default(), seed)
}

pub fn svm_ova_train_with_loss(
    x: &Matrix,
    labels: &[usize],
    num_classes: usize,
    c: f64,
    loss: SvmLoss,
    seed: u64,
) -> Result<SvmModel> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(alloc::format!(
            "C must be positive, got {c}"
        )));
    }
    if labels.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            what: "svm labels",
            expected: x.rows(),
            found: labels.len(),
        });
    }
    x.ensure_finite("svm features")?;
    let first = labels.first().copied();
    if labels.iter().all(|&l| Some(l) == first) {
        return Err(Error::SingleClass);
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= num_classes) {
        return Err(Error::InvalidArgument(alloc::format!(
            "label {l} outside 0..{num_classes}"
        )));
    }
    let (n, p) = x.shape();
    let mean = x.column_means();
    let sd: Vec<f64> = (0..p)
        .map(|j| {
            let v = (0..n)
                .map(|i| {
                    let t = x[(i, j)] - mean[j];
                    t * t
                })
                .sum::<f64>()
                / n as f64;
            let s = math::sqrt(v);
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut r: Vec<f64> = (0..p).map(|j| (x[(i, j)] - mean[j]) / sd[j]).collect();
            r.push(1.0);
            r
        })
        .collect();
    let mut weights = Matrix::zeros(num_classes, p);
    let mut bias = vec![0.0; num_classes];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..num_classes {
        let y: Vec<f64> = labels
            .iter()
            .map(|&l| if l == k { 1.0 } else { -1.0 })
            .collect();
        let w = train_binary(&rows, &y, c, loss, &mut rng);
        let mut b = w[p];
        for j in 0..p {
            weights[(k, j)] = w[j] / sd[j];
            b -= w[j] * mean[j] / sd[j];
        }
        bias[k] = b;
    }
    Ok(SvmModel { weights, bias, c })
}

/// Class with the largest decision value, ties to the smaller index.
pub fn svm_predict(model: &SvmModel, x: &Matrix) -> Result<Vec<usize>> {
    let d = model.decision(x)?;
    Ok((0..d.rows()).map(|i| argmax(d.row(i))).collect())
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (k, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = k;
        }
    }
    best
}

/// `C` from `grid` with the best stratified `k`-fold accuracy, ties to the
/// earliest entry.
pub fn select_c(
    x: &Matrix,
    labels: &[usize],
    num_classes: usize,
    grid: &[f64],
    k: usize,
    seed: u64,
) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty C grid".into()));
    }
    let fold = stratified_folds(labels, num_classes, k.max(2), derive_seed(seed, 0xC0));
    let mut best = (grid[0], -1.0);
    for (gi, &c) in grid.iter().enumerate() {
        let mut correct = 0usize;
        let mut total = 0usize;
        for f in 0..k.max(2) {
            let tr: Vec<usize> = (0..labels.len()).filter(|&i| fold[i] != f).collect();
            let te: Vec<usize> = (0..labels.len()).filter(|&i| fold[i] == f).collect();
            if te.is_empty() {
                continue;
            }
            let ytr: Vec<usize> = tr.iter().map(|&i| labels[i]).collect();
            let model = match svm_ova_train(
                &x.select_rows(&tr),
                &ytr,
                num_classes,
                c,
                derive_seed(seed, (gi * 16 + f) as u64),
            ) {
                Ok(m) => m,
                Err(Error::SingleClass) => continue,
                Err(e) => return Err(e),
            };
            let pred = svm_predict(&model, &x.select_rows(&te))?;
            correct += te
                .iter()
                .zip(&pred)
                .filter(|(&i, &p)| labels[i] == p)
                .count();
            total += te.len();
        }
        let acc = if total == 0 {
            0.0
        } else {
            correct as f64 / total as f64
        };
        if acc > best.1 {
            best = (c, acc);
        }
    }
    Ok(best.0)
}

/// Selects `C` by 5-fold cross-validation over [`C_GRID`] and retrains on
/// all of `x`.
pub fn svm_train_cv(
    x: &Matrix,
    labels: &[usize],
    num_classes: usize,
    seed: u64,
) -> Result<SvmModel> {
    let c = select_c(x, labels, num_classes, &C_GRID, 5, seed)?;
    svm_ova_train(x, labels, num_classes, c, derive_seed(seed, 0x5EED))
}
