use alloc::vec::Vec;

use super::objective::{frame_objective, joint};
use super::zupdate::{scores, y_matrix, z_abs, z_quad, AuxiliaryZ};
use super::{Origin, Variant};
use crate::error::Result;
use crate::linalg::{norm, orthonormal_complement, polar_factor, Matrix};

/// Y columns at or below this fraction of the largest column norm keep their
/// previous axis.
const ZERO_COLUMN: f64 = 1e-12;

/// One alternating problem over a fixed feature matrix `f` (rows are
/// samples). The linear fitter passes preprocessed features, the kernel
/// fitter passes whitened Gram coordinates.
pub(crate) struct Problem<'a> {
    pub f: &'a Matrix,
    pub classes: &'a [Vec<usize>],
    pub origin: Origin,
    pub variant: Variant,
    pub epsilon: f64,
}

pub(crate) struct Outcome {
    pub w: Matrix,
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub degenerate: bool,
}

impl Problem<'_> {
    pub fn z_step(&self, w: &Matrix) -> Result<AuxiliaryZ> {
        let values = self
            .classes
            .iter()
            .enumerate()
            .map(|(k, idx)| {
                let s = scores(self.f, idx, &w.column(k));
                match self.variant {
                    Variant::Quad => Ok(z_quad(&s, self.origin)),
                    Variant::Abs => z_abs(&s, self.epsilon, self.origin, k),
                }
            })
            .collect::<Result<_>>()?;
        Ok(AuxiliaryZ { values })
    }

    pub fn y(&self, z: &AuxiliaryZ) -> Matrix {
        y_matrix(self.f, self.classes, z)
    }

    pub fn objective(&self, w: &Matrix) -> f64 {
        frame_objective(
            self.f,
            self.classes,
            w,
            self.origin,
            self.variant,
            self.epsilon,
        )
    }

    pub fn joint(&self, w: &Matrix, z: &AuxiliaryZ) -> f64 {
        joint(self.f, self.classes, w, z, self.variant, self.epsilon)
    }

    /// Z-update then frame update until the frame moves by at most `delta`
    /// in Frobenius norm. The trace holds the majorised objective after each
    /// frame update. If the cap is hit, the abs variant returns the iterate
    /// with the lowest trace value.
    pub fn run(&self, w0: Matrix, delta: f64, max_iter: usize) -> Result<Outcome> {
        let mut w = w0;
        let mut trace = Vec::new();
        let mut converged = false;
        let mut degenerate = false;
        let mut best: Option<(Matrix, f64)> = None;
        let mut iterations = 0;
        while iterations < max_iter {
            iterations += 1;
            let z = self.z_step(&w)?;
            let (next, deg) = frame_update(&w, &self.y(&z))?;
            degenerate = deg;
            let value = self.joint(&next, &z);
            trace.push(value);
            let change = next.sub(&w).frobenius_norm();
            w = next;
            if self.variant == Variant::Abs && best.as_ref().map_or(true, |b| value < b.1) {
                best = Some((w.clone(), value));
            }
            if change <= delta {
                converged = true;
                break;
            }
        }
        if !converged {
            if let Some((bw, _)) = best {
                w = bw;
            }
        }
        Ok(Outcome {
            w,
            trace,
            iterations,
            converged,
            degenerate,
        })
    }
}

/// Maximiser of `trace(WᵀY)` over orthonormal frames, keeping the previous
/// axis for every numerically zero column of `Y`. The remaining axes are the
/// polar factor of `Y` restricted to the complement of the kept ones.
///
/// The flag reports a kept column or a rank-deficient polar factor.
pub(crate) fn frame_update(prev: &Matrix, y: &Matrix) -> Result<(Matrix, bool)> {
    let k = y.cols();
    let norms: Vec<f64> = (0..k).map(|j| norm(&y.column(j))).collect();
    let top = norms.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok((prev.clone(), true));
    }
    let (fixed, free): (Vec<usize>, Vec<usize>) =
        (0..k).partition(|&j| norms[j] <= ZERO_COLUMN * top);
    if fixed.is_empty() {
        let p = polar_factor(y)?;
        return Ok((p.q, p.degenerate));
    }
    let q = orthonormal_complement(&prev.select_columns(&fixed));
    let p = polar_factor(&q.t_matmul(&y.select_columns(&free)))?;
    let moved = q.matmul(&p.q);
    let mut out = prev.clone();
    for (c, &j) in free.iter().enumerate() {
        out.set_column(j, &moved.column(c));
    }
    Ok((out, true))
}
