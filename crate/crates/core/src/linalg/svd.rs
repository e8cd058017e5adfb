use alloc::vec;
use alloc::vec::Vec;

use super::eigen::fix_column_sign;
use super::matrix::{dot, norm};
use super::Matrix;
use crate::error::{Error, Result};
use crate::math;

const MAX_SWEEPS: usize = 80;

/// Singular values below this fraction of the largest one make the polar
/// factor non-unique.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// Thin singular value decomposition `M = U diag(s) Vᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    /// `D × K`, orthonormal columns.
    pub u: Matrix,
    /// `K` singular values, descending, non-negative.
    pub s: Vec<f64>,
    /// `K × K` orthogonal.
    pub v: Matrix,
}

impl Svd {
    pub fn reconstruct(&self) -> Matrix {
        let (d, k) = self.u.shape();
        Matrix::from_fn(d, k, |i, j| self.u[(i, j)] * self.s[j]).matmul_t(&self.v)
    }
}

/// Thin SVD of a `D × K` matrix with `D ≥ K`, by one-sided Jacobi rotations.
///
/// Each left singular vector is signed so its largest-magnitude entry is
/// positive (the matching right vector is flipped with it). Left vectors for
/// zero or numerically negligible singular values are completed to an
/// orthonormal set deterministically.
pub fn thin_svd(m: &Matrix) -> Result<Svd> {
    let (d, k) = m.shape();
    if d < k {
        return Err(Error::DimensionMismatch {
            what: "thin_svd (rows >= cols)",
            expected: k,
            found: d,
        });
    }
    m.ensure_finite("thin_svd input")?;

    // Column-major working copy.
    let mut a: Vec<Vec<f64>> = (0..k).map(|j| m.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            let mut e = vec![0.0; k];
            e[j] = 1.0;
            e
        })
        .collect();

    let tol = f64::EPSILON * (d.max(1) as f64);
    let mut converged = k < 2;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in (p + 1)..k {
                let alpha = dot(&a[p], &a[p]);
                let beta = dot(&a[q], &a[q]);
                let gamma = dot(&a[p], &a[q]);
                if gamma == 0.0 || math::abs(gamma) <= tol * math::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (math::abs(zeta) + math::sqrt(1.0 + zeta * zeta));
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / math::sqrt(1.0 + t * t);
                let s = c * t;
                rotate(&mut a, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::IterationLimit {
            what: "one-sided Jacobi SVD",
            iterations: MAX_SWEEPS,
        });
    }

    let sing: Vec<f64> = a.iter().map(|col| norm(col)).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| sing[j].total_cmp(&sing[i]).then(i.cmp(&j)));
    let s_max = order.first().map_or(0.0, |&i| sing[i]);

    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    for &j in &order {
        let sj = sing[j];
        let candidate = if sj > 0.0 && sj > f64::MIN_POSITIVE * s_max.max(1.0) {
            Some(a[j].iter().map(|x| x / sj).collect::<Vec<_>>())
        } else {
            None
        };
        let col = candidate
            .and_then(|c| orthonormalize_against(c, &u_cols))
            .unwrap_or_else(|| completion_vector(d, &u_cols));
        u_cols.push(col);
    }

    let mut u = Matrix::from_fn(d, k, |i, j| u_cols[j][i]);
    let mut vm = Matrix::from_fn(k, k, |i, j| v[order[j]][i]);
    let s: Vec<f64> = order.iter().map(|&j| sing[j]).collect();
    for j in 0..k {
        fix_column_sign(&mut u, j, Some(&mut vm));
    }
    Ok(Svd { u, s, v: vm })
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let xp = *x;
        let xq = *y;
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// Two passes of Gram–Schmidt against `basis`. Returns `None` when the
/// remainder is too small to trust.
fn orthonormalize_against(mut v: Vec<f64>, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    let start = norm(&v);
    if start == 0.0 {
        return None;
    }
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, &v);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    }
    let n = norm(&v);
    if n <= 0.5 * start {
        return None;
    }
    for x in &mut v {
        *x /= n;
    }
    Some(v)
}

/// Unit vector orthogonal to `basis`, built from the coordinate axis with the
/// largest residual after projection.
pub(crate) fn completion_vector(d: usize, basis: &[Vec<f64>]) -> Vec<f64> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for axis in 0..d {
        let mut e = vec![0.0; d];
        e[axis] = 1.0;
        for _ in 0..2 {
            for b in basis {
                let c = dot(b, &e);
                for (x, y) in e.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let n = norm(&e);
        if best.as_ref().map_or(true, |(bn, _)| n > *bn + 1e-12) {
            best = Some((n, e));
        }
    }
    let (n, mut e) = best.expect("completion requested with d = 0");
    for x in &mut e {
        *x /= n;
    }
    e
}

/// Orthonormal-column factor of the polar decomposition `M = Q P`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarFactor {
    pub q: Matrix,
    /// Set when the smallest singular value is below
    /// [`DEGENERACY_THRESHOLD`] times the largest, in which case `q` is one of
    /// several maximisers of `trace(QᵀM)`.
    pub degenerate: bool,
}

/// `U Vᵀ` from the thin SVD of `M` (`D ≥ K`): the orthonormal-column matrix
/// closest to `M`, equivalently the maximiser of `trace(QᵀM)`.
pub fn polar_factor(m: &Matrix) -> Result<PolarFactor> {
    let svd = thin_svd(m)?;
    let s_max = svd.s.first().copied().unwrap_or(0.0);
    let s_min = svd.s.last().copied().unwrap_or(0.0);
    let degenerate = !svd.s.is_empty() && (s_max == 0.0 || s_min < DEGENERACY_THRESHOLD * s_max);
    Ok(PolarFactor {
        q: svd.u.matmul_t(&svd.v),
        degenerate,
    })
}
