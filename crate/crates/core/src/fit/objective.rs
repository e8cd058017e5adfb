use super::zupdate::{mean, scores};
use super::{AuxiliaryZ, Origin, Variant};
use crate::data::Dataset;
use crate::linalg::Matrix;
use crate::math;

/// Smoothed objective of a frame: `−½ Σ c²` (quad) or `−Σ √(c² + ε²)` (abs)
/// over the scores `c`, centred per class when the origin is the class mean.
pub(crate) fn frame_objective(
    f: &Matrix,
    classes: &[alloc::vec::Vec<usize>],
    w: &Matrix,
    origin: Origin,
    variant: Variant,
    epsilon: f64,
) -> f64 {
    let mut total = 0.0;
    for (k, idx) in classes.iter().enumerate() {
        let s = scores(f, idx, &w.column(k));
        let m = match origin {
            Origin::ClassMean => mean(&s),
            Origin::GlobalMean => 0.0,
        };
        for v in s {
            let c = v - m;
            total += match variant {
                Variant::Quad => -0.5 * c * c,
                Variant::Abs => -math::hypot(c, epsilon),
            };
        }
    }
    total
}

/// Majorised objective with the auxiliary variables held fixed:
/// `Σ −z s + ½z²` (quad) or `Σ −z s − ε√(1 − z²)` (abs).
pub(crate) fn joint(
    f: &Matrix,
    classes: &[alloc::vec::Vec<usize>],
    w: &Matrix,
    z: &AuxiliaryZ,
    variant: Variant,
    epsilon: f64,
) -> f64 {
    let mut total = 0.0;
    for (k, (idx, zk)) in classes.iter().zip(&z.values).enumerate() {
        let s = scores(f, idx, &w.column(k));
        for (v, &zi) in s.iter().zip(zk) {
            total += -zi * v
                + match variant {
                    Variant::Quad => 0.5 * zi * zi,
                    Variant::Abs => -epsilon * math::sqrt((1.0 - zi * zi).max(0.0)),
                };
        }
    }
    total
}

/// `−½ Σ_k Σ_{i ∈ C_k} (w_kᵀ(x_i − m_k))²`, equal to `−½ Σ w_kᵀR_k w_k`.
pub fn objective_quad(w: &Matrix, data: &Dataset) -> f64 {
    frame_objective(
        data.x(),
        data.class_index(),
        w,
        Origin::ClassMean,
        Variant::Quad,
        0.0,
    )
}

/// `−Σ_k Σ_{i ∈ C_k} √((w_kᵀ(x_i − m_k))² + ε²)`.
pub fn objective_abs(w: &Matrix, data: &Dataset, epsilon: f64) -> f64 {
    frame_objective(
        data.x(),
        data.class_index(),
        w,
        Origin::ClassMean,
        Variant::Abs,
        epsilon,
    )
}

/// Quadratic majorised objective at `(W, Z)`.
pub fn joint_objective_quad(w: &Matrix, z: &AuxiliaryZ, data: &Dataset) -> f64 {
    joint(data.x(), data.class_index(), w, z, Variant::Quad, 0.0)
}

/// Absolute-value majorised objective at `(W, Z)`.
pub fn joint_objective_abs(w: &Matrix, z: &AuxiliaryZ, data: &Dataset, epsilon: f64) -> f64 {
    joint(data.x(), data.class_index(), w, z, Variant::Abs, epsilon)
}
