//! Linear category-space fitting.
//!
//! [`fit_linear`] alternates the closed-form auxiliary update with the polar
//! frame update until the frame stops moving. The building blocks are public
//! so callers can check individual steps.

mod objective;
pub(crate) mod solver;
mod zupdate;

use alloc::vec;
use alloc::vec::Vec;

use crate::data::{Dataset, FeatureScaler, Scaling};
use crate::error::{Error, Result};
use crate::linalg::{random_orthonormal, Matrix};

pub use objective::{joint_objective_abs, joint_objective_quad, objective_abs, objective_quad};
pub use zupdate::{abs_multiplier, build_y, update_z_abs, update_z_quad, AuxiliaryZ};

pub(crate) fn zupdate_quad(s: &[f64]) -> Vec<f64> {
    zupdate::z_quad(s, Origin::ClassMean)
}

pub(crate) fn zupdate_abs(s: &[f64], epsilon: f64, class: usize) -> Result<Vec<f64>> {
    zupdate::z_abs(s, epsilon, Origin::ClassMean, class)
}

/// Inner-product penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    /// Squared inner products.
    #[default]
    Quad,
    /// Smoothed absolute inner products.
    Abs,
}

/// Where category axes are anchored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Origin {
    /// Each class is centred on its own mean; auxiliary variables sum to zero
    /// per class.
    #[default]
    ClassMean,
    /// Features are centred on the training mean and the auxiliary
    /// variables are unconstrained.
    GlobalMean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub variant: Variant,
    pub origin: Origin,
    /// Smoothing of the absolute value.
    pub epsilon: f64,
    /// Stop once the frame moves by at most this much in Frobenius norm.
    pub delta: f64,
    pub max_iter: usize,
    /// Seed of the random initial frame.
    pub seed: u64,
    pub scaling: Scaling,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Quad,
            origin: Origin::ClassMean,
            epsilon: 1e-3,
            delta: 1e-8,
            max_iter: 1000,
            seed: 0,
            scaling: Scaling::None,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::InvalidArgument(alloc::format!(
                "delta must be positive and finite, got {}",
                self.delta
            )));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidArgument(alloc::format!(
                "epsilon must be positive and finite, got {}",
                self.epsilon
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Fitted linear reducer.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    /// `D × K` orthonormal frame, one axis per class.
    pub w: Matrix,
    pub scaler: FeatureScaler,
    /// Subtracted from scaled features before projecting. Zero unless the
    /// origin is the global mean.
    pub center: Vec<f64>,
    pub config: FitConfig,
    /// Majorised objective after each frame update.
    pub objective_trace: Vec<f64>,
    /// Smoothed objective of the final frame.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// A class produced a zero direction, or the last polar factor was not
    /// unique.
    pub degenerate: bool,
}

impl LinearModel {
    pub fn dim(&self) -> usize {
        self.w.rows()
    }

    pub fn num_classes(&self) -> usize {
        self.w.cols()
    }

    /// Scaled and centred features, the space the frame lives in.
    pub fn preprocess(&self, x: &Matrix) -> Result<Matrix> {
        let mut s = self.scaler.apply(x)?;
        if self.center.iter().any(|&c| c != 0.0) {
            for i in 0..s.rows() {
                for (v, c) in s.row_mut(i).iter_mut().zip(&self.center) {
                    *v -= c;
                }
            }
        }
        Ok(s)
    }
}

pub(crate) fn check_classes(data: &Dataset, min: usize) -> Result<()> {
    for (k, idx) in data.class_index().iter().enumerate() {
        if idx.len() < min {
            return Err(Error::ClassTooSmall {
                class: k,
                size: idx.len(),
                min,
            });
        }
    }
    Ok(())
}

/// Fits the frame from a seeded random start.
pub fn fit_linear(data: &Dataset, cfg: &FitConfig) -> Result<LinearModel> {
    let (d, k) = (data.dim(), data.num_classes());
    if k > d {
        return Err(Error::TooManyClasses { classes: k, dim: d });
    }
    let w0 = random_orthonormal(d, k, cfg.seed)?;
    fit_linear_with_init(data, cfg, w0)
}

/// Fits the frame from a caller-supplied orthonormal start.
pub fn fit_linear_with_init(data: &Dataset, cfg: &FitConfig, w0: Matrix) -> Result<LinearModel> {
    cfg.validate()?;
    let (d, k) = (data.dim(), data.num_classes());
    if k > d {
        return Err(Error::TooManyClasses { classes: k, dim: d });
    }
    check_classes(data, 2)?;
    if w0.shape() != (d, k) {
        return Err(Error::DimensionMismatch {
            what: "initial frame",
            expected: d * k,
            found: w0.rows() * w0.cols(),
        });
    }
    let residual = w0.orthonormality_residual();
    if !(residual <= 1e-8) {
        return Err(Error::NotOrthonormal { residual });
    }

    let scaler = FeatureScaler::fit(data.x(), cfg.scaling);
    let center = match cfg.origin {
        Origin::ClassMean => vec![0.0; d],
        Origin::GlobalMean => scaler.apply(data.x())?.column_means(),
    };
    let mut model = LinearModel {
        w: w0,
        scaler,
        center,
        config: cfg.clone(),
        objective_trace: Vec::new(),
        objective: 0.0,
        iterations: 0,
        converged: false,
        degenerate: false,
    };
    let f = model.preprocess(data.x())?;
    let problem = solver::Problem {
        f: &f,
        classes: data.class_index(),
        origin: cfg.origin,
        variant: cfg.variant,
        epsilon: cfg.epsilon,
    };
    let out = problem.run(model.w.clone(), cfg.delta, cfg.max_iter)?;
    model.objective = problem.objective(&out.w);
    model.w = out.w;
    model.objective_trace = out.trace;
    model.iterations = out.iterations;
    model.converged = out.converged;
    model.degenerate = out.degenerate;
    Ok(model)
}

/// Coordinates `y = Wᵀ(scale(x) − center)` of each row of `x`.
pub fn project(model: &LinearModel, x: &Matrix) -> Result<Matrix> {
    x.ensure_finite("projection input")?;
    Ok(model.preprocess(x)?.matmul(&model.w))
}

/// One Z-update followed by one frame update, starting from `w`, on
/// unscaled features with class-mean origin.
pub fn alternation_step(
    w: &Matrix,
    data: &Dataset,
    variant: Variant,
    epsilon: f64,
) -> Result<Matrix> {
    let z = match variant {
        Variant::Quad => update_z_quad(w, data)?,
        Variant::Abs => update_z_abs(w, data, epsilon)?,
    };
    Ok(solver::frame_update(w, &build_y(&z, data)?)?.0)
}
