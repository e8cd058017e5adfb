use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::matrix::{dot, norm};
use super::svd::completion_vector;
use super::Matrix;
use crate::error::{Error, Result};
use crate::math;

/// `rows × cols` matrix of independent standard normal draws from a seeded
/// ChaCha8 stream.
pub fn random_gaussian(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

/// Seeded random point on the Stiefel manifold `St(D, K)`.
///
/// A Gaussian `D × K` matrix is orthonormalised by modified Gram–Schmidt run
/// twice, which fixes the sign so that the implied triangular factor has a
/// positive diagonal.
pub fn random_orthonormal(d: usize, k: usize, seed: u64) -> Result<Matrix> {
    if k > d {
        return Err(Error::TooManyClasses { classes: k, dim: d });
    }
    let g = random_gaussian(d, k, seed);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    for j in 0..k {
        let mut v = g.column(j);
        for _ in 0..2 {
            for b in &cols {
                let c = dot(b, &v);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let n = norm(&v);
        let v = if n > 1e-8 {
            v.iter().map(|x| x / n).collect()
        } else {
            completion_vector(d, &cols)
        };
        cols.push(v);
    }
    Ok(Matrix::from_fn(d, k, |i, j| cols[j][i]))
}

/// Orthonormal basis (`D × (D − K)`) of the complement of the column span of
/// an orthonormal `W`, completed greedily from the coordinate axes.
pub fn orthonormal_complement(w: &Matrix) -> Matrix {
    let (d, k) = w.shape();
    let mut basis: Vec<Vec<f64>> = (0..k).map(|j| w.column(j)).collect();
    let mut extra = Vec::with_capacity(d.saturating_sub(k));
    for _ in k..d {
        let v = completion_vector(d, &basis);
        extra.push(v.clone());
        basis.push(v);
    }
    Matrix::from_fn(d, extra.len(), |i, j| extra[j][i])
}

/// Orthonormal basis of the tangent space of `St(D, K)` at `W`, in the
/// column-stacked vectorisation (entry `(d, k)` of a tangent matrix sits at
/// index `k·D + d`).
///
/// Returns a `KD × (KD − K(K+1)/2)` matrix. The first `K(K−1)/2` columns span
/// the skew directions `W Ω`; the rest are `u_a e_kᵀ` with `u_a` from the
/// complement of `span(W)`.
pub fn stiefel_tangent_basis(w: &Matrix) -> Result<Matrix> {
    let (d, k) = w.shape();
    if k > d {
        return Err(Error::TooManyClasses { classes: k, dim: d });
    }
    let residual = w.orthonormality_residual();
    if !(residual <= 1e-8) {
        return Err(Error::NotOrthonormal { residual });
    }
    let dim = k * d - k * (k + 1) / 2;
    let mut out = Matrix::zeros(k * d, dim);
    let inv_sqrt2 = 1.0 / math::sqrt(2.0);
    let mut col = 0;
    for i in 0..k {
        for j in (i + 1)..k {
            for r in 0..d {
                out[(j * d + r, col)] = w[(r, i)] * inv_sqrt2;
                out[(i * d + r, col)] = -w[(r, j)] * inv_sqrt2;
            }
            col += 1;
        }
    }
    let comp = orthonormal_complement(w);
    for a in 0..comp.cols() {
        for kk in 0..k {
            for r in 0..d {
                out[(kk * d + r, col)] = comp[(r, a)];
            }
            col += 1;
        }
    }
    debug_assert_eq!(col, dim);
    Ok(out)
}
