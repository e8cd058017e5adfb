use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::Matrix;
use crate::error::{Error, Result};
use crate::math;

const MAX_QL_ITERATIONS: usize = 64;

/// Eigendecomposition of a symmetric matrix.
///
/// Eigenvalues are sorted in descending order; `vectors` holds the matching
/// orthonormal eigenvectors as columns. Each eigenvector is signed so that its
/// largest-magnitude entry is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEig {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymEig {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `V diag(λ) Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.values.len();
        let scaled = Matrix::from_fn(n, n, |i, j| self.vectors[(i, j)] * self.values[j]);
        scaled.matmul_t(&self.vectors)
    }
}

/// Symmetric eigendecomposition by Householder tridiagonalisation followed by
/// the implicit QL algorithm.
///
/// The input must be square and symmetric to `1e-10` relative to its largest
/// entry; it is symmetrised before factoring.
pub fn sym_eig(a: &Matrix) -> Result<SymEig> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            what: "sym_eig (square input)",
            expected: a.rows(),
            found: a.cols(),
        });
    }
    a.ensure_finite("sym_eig input")?;
    let scale = a.max_abs().max(1.0);
    let asym = a.asymmetry();
    if asym > 1e-10 * scale {
        return Err(Error::InvalidArgument(format!(
            "sym_eig input is not symmetric (asymmetry {asym:e})"
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(SymEig {
            values: Vec::new(),
            vectors: Matrix::zeros(0, 0),
        });
    }

    let sym = a.symmetrized();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| sym.row(i).to_vec()).collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    tridiagonal_ql(&mut v, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].total_cmp(&d[i]).then(i.cmp(&j)));
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Matrix::from_fn(n, n, |r, c| v[r][order[c]]);
    for c in 0..n {
        fix_column_sign(&mut vectors, c, None);
    }
    Ok(SymEig { values, vectors })
}

/// Flips column `c` (and optionally the matching column of `partner`) so that
/// its largest-magnitude entry is positive. Ties go to the first index.
pub(crate) fn fix_column_sign(m: &mut Matrix, c: usize, partner: Option<&mut Matrix>) {
    let mut best = 0usize;
    let mut best_abs: f64 = -1.0;
    for r in 0..m.rows() {
        let a = math::abs(m[(r, c)]);
        if a > best_abs + 1e-14 * best_abs.max(0.0) {
            best_abs = a;
            best = r;
        }
    }
    if m.rows() > 0 && m[(best, c)] < 0.0 {
        for r in 0..m.rows() {
            m[(r, c)] = -m[(r, c)];
        }
        if let Some(p) = partner {
            for r in 0..p.rows() {
                p[(r, c)] = -p[(r, c)];
            }
        }
    }
}

// Householder reduction to tridiagonal form (EISPACK tred2 lineage).
fn tridiagonalize(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    d.copy_from_slice(&v[n - 1][..n]);
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += math::abs(*dk);
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let f = d[i - 1];
            let mut g = math::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                let f = d[j];
                v[j][i] = f;
                let mut g = e[j] + v[j][j] * f;
                for k in (j + 1)..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n.saturating_sub(1) {
        v[n - 1][i] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for row in v.iter_mut().take(i + 1) {
            row[i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

// Implicit QL on the tridiagonal (d, e), accumulating rotations into v.
fn tridiagonal_ql(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(math::abs(d[l]) + math::abs(e[l]));
        let mut m = l;
        while m < n - 1 && math::abs(e[m]) > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::IterationLimit {
                        what: "symmetric QL eigensolver",
                        iterations: MAX_QL_ITERATIONS,
                    });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = math::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = math::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in v.iter_mut() {
                        let h = row[i + 1];
                        row[i + 1] = s * row[i] + c * h;
                        row[i] = c * row[i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if math::abs(e[l]) <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Whitening map of a positive semidefinite matrix restricted to its
/// numerically nonzero spectrum.
///
/// Eigenvalues `λ ≤ rank_tol · λ_max` are dropped. The returned `r × N` matrix
/// has rows `v_iᵀ / √λ_i`, so that `P G Pᵀ = I_r`. Also returns the retained
/// eigenpairs, which callers use to build reduced coordinates.
pub fn inv_sqrt_psd(g: &Matrix, rank_tol: f64) -> Result<(Matrix, usize)> {
    let (p, _) = inv_sqrt_psd_with_eig(g, rank_tol)?;
    let r = p.rows();
    Ok((p, r))
}

pub(crate) fn inv_sqrt_psd_with_eig(g: &Matrix, rank_tol: f64) -> Result<(Matrix, SymEig)> {
    if !(rank_tol >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "rank tolerance must be non-negative, got {rank_tol}"
        )));
    }
    let eig = sym_eig(g)?;
    let n = eig.len();
    let lmax = eig.values.first().copied().unwrap_or(0.0);
    if !(lmax > 0.0) {
        return Err(Error::DegenerateGram {
            retained: 0,
            required: 1,
        });
    }
    let cutoff = rank_tol * lmax;
    let r = eig
        .values
        .iter()
        .take_while(|&&l| l > cutoff && l > 0.0)
        .count();
    if r == 0 {
        return Err(Error::DegenerateGram {
            retained: 0,
            required: 1,
        });
    }
    let p = Matrix::from_fn(r, n, |i, j| eig.vectors[(j, i)] / math::sqrt(eig.values[i]));
    Ok((p, eig))
}

/// Solution of the symmetric-definite problem `B x = λ C x`.
///
/// Vectors are `C`-orthonormal (`XᵀCX = I`) and sorted by descending `λ`.
pub fn generalized_sym_eig(b: &Matrix, c: &Matrix) -> Result<SymEig> {
    if b.shape() != c.shape() {
        return Err(Error::DimensionMismatch {
            what: "generalized_sym_eig",
            expected: c.rows(),
            found: b.rows(),
        });
    }
    let ce = sym_eig(c)?;
    let n = ce.len();
    if let Some(&min) = ce.values.last() {
        if !(min > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "right-hand matrix of generalized eigenproblem is not positive definite (min eigenvalue {min:e})"
            )));
        }
    }
    let c_inv_half = Matrix::from_fn(n, n, |i, j| ce.vectors[(i, j)] / math::sqrt(ce.values[j]))
        .matmul_t(&ce.vectors);
    let m = c_inv_half.matmul(b).matmul(&c_inv_half).symmetrized();
    let inner = sym_eig(&m)?;
    let mut vectors = c_inv_half.matmul(&inner.vectors);
    for col in 0..n {
        fix_column_sign(&mut vectors, col, None);
    }
    Ok(SymEig {
        values: inner.values,
        vectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_symmetric(n: usize, seed: u64) -> Matrix {
        let w = crate::linalg::random_gaussian(n, n, seed);
        w.add(&w.transpose())
    }

    #[test]
    fn diagonal_input_is_sorted_descending() {
        let eig = sym_eig(&Matrix::diag(&[1.0, 3.0, 2.0])).unwrap();
        assert_eq!(eig.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(eig.vectors[(1, 0)], 1.0);
        assert_eq!(eig.vectors[(2, 1)], 1.0);
        assert_eq!(eig.vectors[(0, 2)], 1.0);
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        for (n, seed) in [(1, 1), (2, 2), (5, 3), (17, 4), (40, 5)] {
            let a = random_symmetric(n, seed);
            let eig = sym_eig(&a).unwrap();
            assert!(eig.vectors.orthonormality_residual() < 1e-10);
            let err = eig.reconstruct().sub(&a).frobenius_norm();
            assert!(
                err <= 1e-8 * a.frobenius_norm().max(1.0),
                "n={n} err={err:e}"
            );
            assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn repeated_eigenvalues() {
        let eig = sym_eig(&Matrix::identity(4).scale(2.5)).unwrap();
        assert!(eig.values.iter().all(|&l| (l - 2.5).abs() < 1e-14));
        assert!(eig.vectors.orthonormality_residual() < 1e-12);
    }

    #[test]
    fn rejects_asymmetric_and_non_finite() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eig(&a), Err(Error::InvalidArgument(_))));
        let b = Matrix::from_rows(&[[f64::NAN, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(sym_eig(&b), Err(Error::NonFinite("sym_eig input")));
    }

    #[test]
    fn inv_sqrt_identity() {
        let (p, r) = inv_sqrt_psd(&Matrix::identity(3), 1e-10).unwrap();
        assert_eq!(r, 3);
        assert_eq!(p, Matrix::identity(3));
    }

    #[test]
    fn inv_sqrt_drops_null_directions() {
        let (p, r) = inv_sqrt_psd(&Matrix::diag(&[4.0, 1.0, 0.0]), 1e-10).unwrap();
        assert_eq!(r, 2);
        assert_eq!(
            p,
            Matrix::from_rows(&[[0.5, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap()
        );
    }

    #[test]
    fn inv_sqrt_of_zero_matrix_is_degenerate() {
        assert!(matches!(
            inv_sqrt_psd(&Matrix::zeros(3, 3), 1e-10),
            Err(Error::DegenerateGram { .. })
        ));
    }

    #[test]
    fn generalized_problem_is_c_orthonormal() {
        let b = random_symmetric(6, 11);
        let w = crate::linalg::random_gaussian(6, 6, 12);
        let c = w.t_matmul(&w).add(&Matrix::identity(6));
        let ge = generalized_sym_eig(&b, &c).unwrap();
        let xcx = ge.vectors.t_matmul(&c).matmul(&ge.vectors);
        assert!(xcx.sub(&Matrix::identity(6)).frobenius_norm() < 1e-9);
        let bx = b.matmul(&ge.vectors);
        let cx = c.matmul(&ge.vectors);
        for j in 0..6 {
            for i in 0..6 {
                assert!((bx[(i, j)] - ge.values[j] * cx[(i, j)]).abs() < 1e-8);
            }
        }
    }
}
