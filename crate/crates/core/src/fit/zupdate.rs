use alloc::vec::Vec;

use super::Origin;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::math;

const MAX_BRACKET_EXPANSIONS: usize = 60;
const MAX_BISECTIONS: usize = 200;

/// Auxiliary variables of the majorised objective, one per sample.
///
/// `values[k][j]` belongs to sample `class_index[k][j]` of the dataset the
/// update was computed on.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryZ {
    pub values: Vec<Vec<f64>>,
}

impl AuxiliaryZ {
    pub fn class_sums(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.iter().sum()).collect()
    }

    /// Values scattered back into sample order.
    pub fn per_sample(&self, class_index: &[Vec<usize>]) -> Vec<f64> {
        let n = class_index.iter().map(Vec::len).sum();
        let mut out = alloc::vec![0.0; n];
        for (idx, z) in class_index.iter().zip(&self.values) {
            for (&i, &v) in idx.iter().zip(z) {
                out[i] = v;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .fold(0.0, |m, &v| m.max(math::abs(v)))
    }
}

/// Scores `f_iᵀw` of the listed rows.
pub(crate) fn scores(f: &Matrix, idx: &[usize], w: &[f64]) -> Vec<f64> {
    idx.iter().map(|&i| dot(f.row(i), w)).collect()
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Closed-form quadratic update. Class origin centres the scores (twice, to
/// clean up rounding); global origin passes them through.
pub(crate) fn z_quad(s: &[f64], origin: Origin) -> Vec<f64> {
    match origin {
        Origin::GlobalMean => s.to_vec(),
        Origin::ClassMean => {
            let m = mean(s);
            let mut z: Vec<f64> = s.iter().map(|v| v - m).collect();
            let r = mean(&z);
            for v in &mut z {
                *v -= r;
            }
            z
        }
    }
}

#[inline]
fn slope(t: f64, epsilon: f64) -> f64 {
    let h = math::hypot(t, epsilon);
    if h == 0.0 {
        0.0
    } else {
        t / h
    }
}

fn multiplier_residual(s: &[f64], mu: f64, epsilon: f64) -> f64 {
    s.iter().map(|&v| slope(v + mu, epsilon)).sum()
}

/// Multiplier `μ` with `Σ_i (s_i + μ)/√((s_i + μ)² + ε²) = 0`.
///
/// The map is increasing in `μ`. The search starts from a bracket of
/// half-width `ε` around `−mean(s)`, doubles it until the residual changes
/// sign (at most 60 times), then bisects.
pub fn abs_multiplier(s: &[f64], epsilon: f64, class: usize) -> Result<f64> {
    if s.is_empty() {
        return Ok(0.0);
    }
    let centre = -mean(s);
    if multiplier_residual(s, centre, epsilon) == 0.0 {
        return Ok(centre);
    }
    let mut h = epsilon;
    let mut expansions = 0;
    let (mut lo, mut hi) = (centre - h, centre + h);
    while multiplier_residual(s, lo, epsilon) > 0.0 || multiplier_residual(s, hi, epsilon) < 0.0 {
        expansions += 1;
        if expansions > MAX_BRACKET_EXPANSIONS || !h.is_finite() {
            return Err(Error::BracketFailure { class });
        }
        h *= 2.0;
        lo = centre - h;
        hi = centre + h;
    }
    let tol = 1e-13 * s.len() as f64;
    let mut best = (lo, math::abs(multiplier_residual(s, lo, epsilon)));
    let hi_res = math::abs(multiplier_residual(s, hi, epsilon));
    if hi_res < best.1 {
        best = (hi, hi_res);
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = multiplier_residual(s, mid, epsilon);
        if math::abs(g) < best.1 {
            best = (mid, math::abs(g));
        }
        if math::abs(g) <= tol {
            break;
        }
        if g < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best.0)
}

/// Absolute-value update. Class origin solves for the per-class multiplier
/// so the class sum vanishes; global origin uses `μ = 0`.
pub(crate) fn z_abs(s: &[f64], epsilon: f64, origin: Origin, class: usize) -> Result<Vec<f64>> {
    match origin {
        Origin::GlobalMean => Ok(s.iter().map(|&v| slope(v, epsilon)).collect()),
        Origin::ClassMean => {
            let mu = abs_multiplier(s, epsilon, class)?;
            let mut z: Vec<f64> = s.iter().map(|&v| slope(v + mu, epsilon)).collect();
            let r = mean(&z);
            if r != 0.0 {
                for v in &mut z {
                    *v = (*v - r).clamp(-1.0, 1.0);
                }
            }
            Ok(z)
        }
    }
}

fn check_frame(w: &Matrix, data: &Dataset) -> Result<()> {
    if w.rows() != data.dim() {
        return Err(Error::DimensionMismatch {
            what: "frame rows",
            expected: data.dim(),
            found: w.rows(),
        });
    }
    if w.cols() != data.num_classes() {
        return Err(Error::DimensionMismatch {
            what: "frame columns",
            expected: data.num_classes(),
            found: w.cols(),
        });
    }
    w.ensure_finite("frame")
}

/// `z_i = w_kᵀ(x_i − m_k)` for every sample `i` of class `k`.
pub fn update_z_quad(w: &Matrix, data: &Dataset) -> Result<AuxiliaryZ> {
    check_frame(w, data)?;
    let values = data
        .class_index()
        .iter()
        .enumerate()
        .map(|(k, idx)| z_quad(&scores(data.x(), idx, &w.column(k)), Origin::ClassMean))
        .collect();
    Ok(AuxiliaryZ { values })
}

/// `z_i = (s_i + μ_k)/√((s_i + μ_k)² + ε²)` with `s_i = w_kᵀx_i` and `μ_k`
/// chosen so each class sums to zero.
pub fn update_z_abs(w: &Matrix, data: &Dataset, epsilon: f64) -> Result<AuxiliaryZ> {
    check_frame(w, data)?;
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let values = data
        .class_index()
        .iter()
        .enumerate()
        .map(|(k, idx)| {
            z_abs(
                &scores(data.x(), idx, &w.column(k)),
                epsilon,
                Origin::ClassMean,
                k,
            )
        })
        .collect::<Result<_>>()?;
    Ok(AuxiliaryZ { values })
}

pub(crate) fn y_matrix(f: &Matrix, classes: &[Vec<usize>], z: &AuxiliaryZ) -> Matrix {
    let p = f.cols();
    let mut y = Matrix::zeros(p, classes.len());
    for (k, (idx, zk)) in classes.iter().zip(&z.values).enumerate() {
        for (&i, &zi) in idx.iter().zip(zk) {
            if zi == 0.0 {
                continue;
            }
            for (j, &fv) in f.row(i).iter().enumerate() {
                y[(j, k)] += zi * fv;
            }
        }
    }
    y
}

/// `D × K` matrix whose column `k` is `Σ_{i ∈ C_k} z_i x_i`.
pub fn build_y(z: &AuxiliaryZ, data: &Dataset) -> Result<Matrix> {
    let sizes = data.class_sizes();
    let ok =
        z.values.len() == sizes.len() && z.values.iter().zip(&sizes).all(|(v, &s)| v.len() == s);
    if !ok {
        return Err(Error::DimensionMismatch {
            what: "auxiliary variables",
            expected: data.len(),
            found: z.values.iter().map(Vec::len).sum(),
        });
    }
    Ok(y_matrix(data.x(), data.class_index(), z))
}
