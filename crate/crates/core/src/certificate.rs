//! Optimality test for frames maximising `Σ_k w_kᵀR_k w_k` on the Stiefel
//! manifold.
//!
//! With `w` the column-stacked frame (entry `(d, k)` at `k·D + d`), `R` the
//! block diagonal of the `R_k` and `S(w)` the block matrix with blocks
//! `s_ij I_D`, where `s_ij = ½(w_iᵀR_j w_j + w_jᵀR_i w_i)`:
//!
//! - `R w = S(w) w` is first-order stationarity,
//! - `R − S(w)` negative semidefinite on the tangent space is the
//!   second-order necessary condition,
//! - `R − S(w)` negative semidefinite on all of `R^{KD}` certifies a global
//!   optimum.

use alloc::vec::Vec;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::fit::{LinearModel, Origin};
use crate::linalg::{norm, stiefel_tangent_basis, sym_eig, Matrix};

/// Largest `KD` for which the dense eigenproblems are attempted.
pub const MAX_CERTIFICATE_SIZE: usize = 2000;

/// Stationarity threshold, relative to `1 + λ_max(R)`.
pub const STATIONARITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    /// `‖R w − S(w) w‖₂`.
    pub first_order_residual: f64,
    /// Largest eigenvalue of `R − S(w)` restricted to the tangent space
    /// (0 when the tangent space is trivial).
    pub tangent_max_eig: f64,
    /// Largest eigenvalue of `R − S(w)`.
    pub full_max_eig: f64,
    /// Eigenvalue tolerance used for both flags.
    pub tolerance: f64,
    /// `first_order_residual ≤ 1e-6·(1 + λ_max(R))`.
    pub is_stationary: bool,
    pub is_second_order_necessary: bool,
    pub is_global_certified: bool,
}

/// Default eigenvalue tolerance `1e-8·(1 + λ_max(R))`.
pub fn default_tolerance(scatters: &[Matrix]) -> Result<f64> {
    Ok(1e-8 * (1.0 + max_block_eig(scatters)?))
}

fn max_block_eig(scatters: &[Matrix]) -> Result<f64> {
    let mut top = 0.0f64;
    for r in scatters {
        if let Some(&l) = sym_eig(r)?.values.first() {
            top = top.max(l);
        }
    }
    Ok(top)
}

/// Certificate for frame `w` against explicit per-class matrices `R_k`.
pub fn certificate_from_scatters(
    w: &Matrix,
    scatters: &[Matrix],
    tol: Option<f64>,
) -> Result<CertificateReport> {
    let (d, k) = w.shape();
    if scatters.len() != k {
        return Err(Error::DimensionMismatch {
            what: "certificate class matrices",
            expected: k,
            found: scatters.len(),
        });
    }
    if let Some(r) = scatters.iter().find(|r| r.shape() != (d, d)) {
        return Err(Error::DimensionMismatch {
            what: "certificate class matrix size",
            expected: d,
            found: r.rows(),
        });
    }
    let n = k * d;
    if n > MAX_CERTIFICATE_SIZE {
        return Err(Error::BudgetExceeded {
            size: n,
            budget: MAX_CERTIFICATE_SIZE,
        });
    }
    w.ensure_finite("certificate frame")?;
    let residual = w.orthonormality_residual();
    if !(residual <= 1e-8) {
        return Err(Error::NotOrthonormal { residual });
    }

    let cols: Vec<Vec<f64>> = (0..k).map(|j| w.column(j)).collect();
    let rw: Vec<Vec<f64>> = (0..k).map(|j| scatters[j].matvec(&cols[j])).collect();
    // s_ij = ½(w_iᵀ R_j w_j + w_jᵀ R_i w_i)
    let s = Matrix::from_fn(k, k, |i, j| {
        0.5 * (crate::linalg::dot(&cols[i], &rw[j]) + crate::linalg::dot(&cols[j], &rw[i]))
    });

    let mut m = Matrix::zeros(n, n);
    for b in 0..k {
        for r in 0..d {
            for c in 0..d {
                m[(b * d + r, b * d + c)] = scatters[b][(r, c)];
            }
        }
        for b2 in 0..k {
            for r in 0..d {
                m[(b * d + r, b2 * d + r)] -= s[(b, b2)];
            }
        }
    }
    let m = m.symmetrized();
    let v: Vec<f64> = cols.iter().flatten().copied().collect();
    let first_order_residual = norm(&m.matvec(&v));

    let lambda_r = max_block_eig(scatters)?;
    let tolerance = match tol {
        Some(t) if t >= 0.0 => t,
        Some(t) => {
            return Err(Error::InvalidArgument(alloc::format!(
                "certificate tolerance must be non-negative, got {t}"
            )))
        }
        None => 1e-8 * (1.0 + lambda_r),
    };

    let full_max_eig = sym_eig(&m)?.values.first().copied().unwrap_or(0.0);
    let basis = stiefel_tangent_basis(w)?;
    let tangent_max_eig = if basis.cols() == 0 {
        0.0
    } else {
        let t = basis.t_matmul(&m.matmul(&basis)).symmetrized();
        sym_eig(&t)?.values[0]
    };

    let is_stationary = first_order_residual <= STATIONARITY_TOL * (1.0 + lambda_r);
    let is_second_order_necessary = is_stationary && tangent_max_eig <= tolerance;
    let is_global_certified = is_second_order_necessary && full_max_eig <= tolerance;
    Ok(CertificateReport {
        first_order_residual,
        tangent_max_eig,
        full_max_eig,
        tolerance,
        is_stationary,
        is_second_order_necessary,
        is_global_certified,
    })
}

/// Certificate for `w` on `data` with `R_k` the class scatter about the
/// class mean.
pub fn certificate_check(
    w: &Matrix,
    data: &Dataset,
    tol: Option<f64>,
) -> Result<CertificateReport> {
    if w.rows() != data.dim() {
        return Err(Error::DimensionMismatch {
            what: "frame rows",
            expected: data.dim(),
            found: w.rows(),
        });
    }
    certificate_from_scatters(w, &data.class_scatters(), tol)
}

/// Second moments `Σ x xᵀ` of each class, without centring.
pub(crate) fn class_second_moments(x: &Matrix, classes: &[Vec<usize>]) -> Vec<Matrix> {
    classes
        .iter()
        .map(|idx| {
            x.select_rows(idx)
                .t_matmul(&x.select_rows(idx))
                .symmetrized()
        })
        .collect()
}

/// Certificate for a fitted model in the feature space it was fitted in,
/// honouring its scaling and origin.
pub fn model_certificate(
    model: &LinearModel,
    data: &Dataset,
    tol: Option<f64>,
) -> Result<CertificateReport> {
    let f = model.preprocess(data.x())?;
    let scatters = match model.config.origin {
        Origin::ClassMean => data.with_features(f)?.class_scatters(),
        Origin::GlobalMean => class_second_moments(&f, data.class_index()),
    };
    certificate_from_scatters(&model.w, &scatters, tol)
}
