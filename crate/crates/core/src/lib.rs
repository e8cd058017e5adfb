//! Category-space supervised dimensionality reduction.
//!
//! Each of the `K` classes gets one axis of an orthonormal frame `W` (a point
//! on the Stiefel manifold). Patterns are projected onto the frame so that
//! every pattern has a large inner product with its own class axis. The frame
//! is learned by alternating a closed-form update of per-sample auxiliary
//! variables with a polar-decomposition update of the frame.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. File formats,
//! CSV ingestion, plotting and the command-line tool live in `catspace-cli`.
//!
//! Main entry points:
//!
//! - [`fit::fit_linear`] and [`fit::project`] for the linear model,
//! - [`kernel::fit_kernel`] and [`kernel::kernel_project`] for RKHS kernels,
//! - [`certificate::certificate_check`] for the global-optimality test,
//! - [`baselines`] for PCA, kernel PCA, Fisher and kernel Fisher reducers,
//! - [`eval`] for splits, the one-vs-all SVM, the angle classifier and the
//!   benchmark protocol.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod baselines;
pub mod certificate;
pub mod data;
mod error;
pub mod eval;
pub mod fit;
pub mod kernel;
pub mod linalg;
mod math;

pub use crate::data::{Dataset, FeatureScaler, Scaling};
pub use crate::error::{Error, Result};
pub use crate::linalg::Matrix;
