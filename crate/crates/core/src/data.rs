//! Labelled feature matrices and per-feature scaling.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::math;

/// Feature matrix with 0-based class labels.
///
/// Rows of `x` are samples. Every class in `0..num_classes` has at least one
/// sample, so `class_index` partitions `0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Matrix,
    labels: Vec<usize>,
    num_classes: usize,
    class_index: Vec<Vec<usize>>,
}

impl Dataset {
    pub fn new(x: Matrix, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if labels.len() != x.rows() {
            return Err(Error::DimensionMismatch {
                what: "labels",
                expected: x.rows(),
                found: labels.len(),
            });
        }
        x.ensure_finite("dataset features")?;
        if num_classes < 2 {
            return Err(Error::SingleClass);
        }
        let mut class_index = vec![Vec::new(); num_classes];
        for (i, &l) in labels.iter().enumerate() {
            if l >= num_classes {
                return Err(Error::InvalidArgument(alloc::format!(
                    "label {l} at row {i} is outside 0..{num_classes}"
                )));
            }
            class_index[l].push(i);
        }
        if let Some(k) = class_index.iter().position(|c| c.is_empty()) {
            return Err(Error::ClassTooSmall {
                class: k,
                size: 0,
                min: 1,
            });
        }
        Ok(Self {
            x,
            labels,
            num_classes,
            class_index,
        })
    }

    /// Infers `num_classes` as one more than the largest label.
    pub fn from_labels(x: Matrix, labels: Vec<usize>) -> Result<Self> {
        let k = labels.iter().max().map_or(0, |m| m + 1);
        Self::new(x, labels, k)
    }

    #[inline]
    pub fn x(&self) -> &Matrix {
        &self.x
    }

    #[inline]
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    #[inline]
    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Number of samples.
    #[inline]
    pub fn len(&self) -> usize {
        self.x.rows()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.x.rows() == 0
    }

    /// Feature dimension.
    #[inline]
    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    /// Sample indices of each class, ascending.
    #[inline]
    pub fn class_index(&self) -> &[Vec<usize>] {
        &self.class_index
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.class_index.iter().map(Vec::len).collect()
    }

    /// Rows listed in `indices`, keeping the class count.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self::new(self.x.select_rows(indices), labels, self.num_classes)
    }

    /// Same labels over a different feature matrix with the same row count.
    pub fn with_features(&self, x: Matrix) -> Result<Self> {
        if x.rows() != self.len() {
            return Err(Error::DimensionMismatch {
                what: "replacement features",
                expected: self.len(),
                found: x.rows(),
            });
        }
        x.ensure_finite("dataset features")?;
        Ok(Self {
            x,
            labels: self.labels.clone(),
            num_classes: self.num_classes,
            class_index: self.class_index.clone(),
        })
    }

    /// `K × D` matrix of class means.
    pub fn class_means(&self) -> Matrix {
        let d = self.dim();
        let mut m = Matrix::zeros(self.num_classes, d);
        for (k, idx) in self.class_index.iter().enumerate() {
            let row = m.row_mut(k);
            for &i in idx {
                for (a, &b) in row.iter_mut().zip(self.x.row(i)) {
                    *a += b;
                }
            }
            let inv = 1.0 / idx.len() as f64;
            for a in row.iter_mut() {
                *a *= inv;
            }
        }
        m
    }

    /// Per-class scatter matrices `R_k = Σ (x_i − m_k)(x_i − m_k)ᵀ`.
    pub fn class_scatters(&self) -> Vec<Matrix> {
        let means = self.class_means();
        let d = self.dim();
        self.class_index
            .iter()
            .enumerate()
            .map(|(k, idx)| {
                let c = Matrix::from_fn(idx.len(), d, |r, j| self.x[(idx[r], j)] - means[(k, j)]);
                c.t_matmul(&c).symmetrized()
            })
            .collect()
    }
}

/// Per-feature preprocessing applied before fitting and projecting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scaling {
    #[default]
    None,
    /// Zero mean, unit (population) variance.
    ZScore,
    /// Map the training range onto `[0, 1]`.
    MinMax,
}

/// Affine map `x ↦ (x − offset) / scale`, fitted on training features.
///
/// Constant features get `scale = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScaler {
    pub offset: Vec<f64>,
    pub scale: Vec<f64>,
}

impl FeatureScaler {
    pub fn identity(dim: usize) -> Self {
        Self {
            offset: vec![0.0; dim],
            scale: vec![1.0; dim],
        }
    }

    pub fn fit(x: &Matrix, scaling: Scaling) -> Self {
        let d = x.cols();
        let n = x.rows();
        match scaling {
            Scaling::None => Self::identity(d),
            Scaling::ZScore => {
                let offset = x.column_means();
                let mut var = vec![0.0; d];
                for i in 0..n {
                    for (j, v) in var.iter_mut().enumerate() {
                        let t = x[(i, j)] - offset[j];
                        *v += t * t;
                    }
                }
                let scale = var
                    .iter()
                    .map(|&v| {
                        let sd = math::sqrt(v / n.max(1) as f64);
                        if sd > 0.0 {
                            sd
                        } else {
                            1.0
                        }
                    })
                    .collect();
                Self { offset, scale }
            }
            Scaling::MinMax => {
                let mut lo = vec![f64::INFINITY; d];
                let mut hi = vec![f64::NEG_INFINITY; d];
                for i in 0..n {
                    for j in 0..d {
                        lo[j] = lo[j].min(x[(i, j)]);
                        hi[j] = hi[j].max(x[(i, j)]);
                    }
                }
                if n == 0 {
                    return Self::identity(d);
                }
                let scale = lo
                    .iter()
                    .zip(&hi)
                    .map(|(&l, &h)| if h > l { h - l } else { 1.0 })
                    .collect();
                Self { offset: lo, scale }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "scaler input columns",
                expected: self.dim(),
                found: x.cols(),
            });
        }
        Ok(Matrix::from_fn(x.rows(), x.cols(), |i, j| {
            (x[(i, j)] - self.offset[j]) / self.scale[j]
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        let x = Matrix::from_rows(&[[0.0, 1.0], [2.0, 1.0], [4.0, 5.0], [6.0, 7.0]]).unwrap();
        Dataset::new(x, vec![0, 0, 1, 1], 2).unwrap()
    }

    #[test]
    fn class_index_and_means() {
        let d = toy();
        assert_eq!(d.class_index(), &[vec![0, 1], vec![2, 3]]);
        assert_eq!(
            d.class_means(),
            Matrix::from_rows(&[[1.0, 1.0], [5.0, 6.0]]).unwrap()
        );
        let r = d.class_scatters();
        assert_eq!(r[0], Matrix::from_rows(&[[2.0, 0.0], [0.0, 0.0]]).unwrap());
        assert_eq!(r[1], Matrix::from_rows(&[[2.0, 2.0], [2.0, 2.0]]).unwrap());
    }

    #[test]
    fn rejects_bad_labels() {
        let x = Matrix::zeros(3, 2);
        assert!(matches!(
            Dataset::new(x.clone(), vec![0, 0, 2], 3),
            Err(Error::ClassTooSmall { class: 1, .. })
        ));
        assert_eq!(
            Dataset::new(x.clone(), vec![0, 0, 0], 1),
            Err(Error::SingleClass)
        );
        assert!(Dataset::new(x, vec![0, 5, 1], 2).is_err());
    }

    #[test]
    fn scalers() {
        let x = Matrix::from_rows(&[[1.0, 3.0], [3.0, 3.0]]).unwrap();
        let z = FeatureScaler::fit(&x, Scaling::ZScore).apply(&x).unwrap();
        assert_eq!(z, Matrix::from_rows(&[[-1.0, 0.0], [1.0, 0.0]]).unwrap());
        let m = FeatureScaler::fit(&x, Scaling::MinMax).apply(&x).unwrap();
        assert_eq!(m, Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap());
        assert_eq!(FeatureScaler::fit(&x, Scaling::None).apply(&x).unwrap(), x);
    }
}
