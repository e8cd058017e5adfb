//! Dense linear algebra used by the fitting code: a row-major matrix type,
//! symmetric eigensolvers, a thin SVD with polar factor, and Stiefel-manifold
//! helpers.

mod eigen;
mod matrix;
mod stiefel;
mod svd;

pub(crate) use eigen::inv_sqrt_psd_with_eig;
pub use eigen::{generalized_sym_eig, inv_sqrt_psd, sym_eig, SymEig};
pub use matrix::{dot, norm, Matrix};
pub use stiefel::{
    orthonormal_complement, random_gaussian, random_orthonormal, stiefel_tangent_basis,
};
pub use svd::{polar_factor, thin_svd, PolarFactor, Svd, DEGENERACY_THRESHOLD};
