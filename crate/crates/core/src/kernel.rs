//! Kernel category-space fitting.
//!
//! Axes are expansions `w_k = Σ_j α_kj φ(x_j)` over the training patterns,
//! with `A G Aᵀ = I`. Writing `G ≈ E Λ Eᵀ` over the retained spectrum and
//! `P = Λ^{-1/2} Eᵀ`, the change of variables `A = Bᵀ P` turns the problem
//! into the linear one on the features `f_i = Λ^{1/2} Eᵀ e_i` with an
//! orthonormal `r × K` frame `B`. All iterations run on `B`.

use alloc::vec;
use alloc::vec::Vec;

use crate::certificate::{certificate_from_scatters, class_second_moments, CertificateReport};
use crate::data::{Dataset, FeatureScaler};
use crate::error::{Error, Result};
use crate::fit::solver::Problem;
use crate::fit::{check_classes, AuxiliaryZ, FitConfig, Origin, Variant};
use crate::linalg::{inv_sqrt_psd_with_eig, random_orthonormal, Matrix};
use crate::math;

/// Eigenvalues of `G` at or below this fraction of the largest are dropped.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    /// `exp(−‖x − y‖² / (2σ²))`.
    Rbf { sigma: f64 },
    /// `xᵀy`.
    Linear,
    /// `(xᵀy + offset)^degree`.
    Polynomial { degree: f64, offset: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Rbf { sigma } if !(sigma > 0.0 && sigma.is_finite()) => {
                Err(Error::InvalidArgument(alloc::format!(
                    "rbf sigma must be positive and finite, got {sigma}"
                )))
            }
            KernelSpec::Polynomial { degree, offset }
                if !(degree.is_finite() && offset.is_finite()) =>
            {
                Err(Error::InvalidArgument(
                    "polynomial degree and offset must be finite".into(),
                ))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            KernelSpec::Rbf { sigma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                math::exp(-d2 / (2.0 * sigma * sigma))
            }
            KernelSpec::Linear => crate::linalg::dot(a, b),
            KernelSpec::Polynomial { degree, offset } => {
                math::powf(crate::linalg::dot(a, b) + offset, degree)
            }
        }
    }
}

/// Symmetric matrix of pairwise kernel values.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub g: Matrix,
    pub spec: KernelSpec,
}

/// `G_ij = k(x_i, x_j)` over the rows of `x`.
pub fn gram(x: &Matrix, spec: KernelSpec) -> Result<GramMatrix> {
    spec.validate()?;
    x.ensure_finite("gram input")?;
    let n = x.rows();
    let mut g = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = spec.eval(x.row(i), x.row(j));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g.ensure_finite("gram matrix")?;
    Ok(GramMatrix { g, spec })
}

/// `M × N` matrix `k(a_i, b_j)`.
pub fn cross_gram(a: &Matrix, b: &Matrix, spec: KernelSpec) -> Result<Matrix> {
    spec.validate()?;
    if a.cols() != b.cols() {
        return Err(Error::DimensionMismatch {
            what: "kernel input columns",
            expected: b.cols(),
            found: a.cols(),
        });
    }
    let m = Matrix::from_fn(a.rows(), b.rows(), |i, j| spec.eval(a.row(i), b.row(j)));
    m.ensure_finite("cross gram")?;
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelModel {
    /// `K × N` expansion coefficients.
    pub a: Matrix,
    /// `r × K` orthonormal frame in the reduced coordinates.
    pub b: Matrix,
    /// Scaled training patterns.
    pub train_x: Matrix,
    pub scaler: FeatureScaler,
    pub spec: KernelSpec,
    /// `r × N` whitening map `Λ^{-1/2} Eᵀ`.
    pub ginvhalf: Matrix,
    pub retained_rank: usize,
    /// Subtracted from every projection. Nonzero only for the global-mean
    /// origin.
    pub offset: Vec<f64>,
    pub config: FitConfig,
    pub objective_trace: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub degenerate: bool,
}

impl KernelModel {
    pub fn num_classes(&self) -> usize {
        self.a.rows()
    }

    /// Reduced training coordinates `f_i`, one row per training sample.
    pub fn reduced_features(&self) -> Result<Matrix> {
        let g = gram(&self.train_x, self.spec)?.g;
        Ok(self.ginvhalf.matmul(&g).transpose())
    }
}

fn reduced(g: &Matrix, rank_tol: f64) -> Result<(Matrix, Matrix)> {
    let (p, eig) = inv_sqrt_psd_with_eig(g, rank_tol)?;
    let r = p.rows();
    let f = Matrix::from_fn(g.rows(), r, |i, a| {
        math::sqrt(eig.values[a]) * eig.vectors[(i, a)]
    });
    Ok((p, f))
}

/// Fits `K` kernel axes. With the linear kernel and a full-rank design the
/// start is the image of the linear fitter's seeded start, so both follow
/// the same iterates.
pub fn fit_kernel(data: &Dataset, spec: KernelSpec, cfg: &FitConfig) -> Result<KernelModel> {
    cfg.validate()?;
    spec.validate()?;
    check_classes(data, 2)?;
    let k = data.num_classes();
    let scaler = FeatureScaler::fit(data.x(), cfg.scaling);
    let train_x = scaler.apply(data.x())?;
    let g = gram(&train_x, spec)?.g;
    let (p, mut f) = reduced(&g, DEFAULT_RANK_TOL)?;
    let r = p.rows();
    if r < k {
        return Err(Error::DegenerateGram {
            retained: r,
            required: k,
        });
    }
    let fmean = f.column_means();
    if cfg.origin == Origin::GlobalMean {
        for i in 0..f.rows() {
            for (v, m) in f.row_mut(i).iter_mut().zip(&fmean) {
                *v -= m;
            }
        }
    }

    let d = train_x.cols();
    let b0 = if spec == KernelSpec::Linear && r == d && k <= d {
        let w0 = random_orthonormal(d, k, cfg.seed)?;
        let b0 = p.matmul(&train_x).matmul(&w0);
        if b0.orthonormality_residual() <= 1e-8 {
            b0
        } else {
            random_orthonormal(r, k, cfg.seed)?
        }
    } else {
        random_orthonormal(r, k, cfg.seed)?
    };

    let problem = Problem {
        f: &f,
        classes: data.class_index(),
        origin: cfg.origin,
        variant: cfg.variant,
        epsilon: cfg.epsilon,
    };
    let out = problem.run(b0, cfg.delta, cfg.max_iter)?;
    let objective = problem.objective(&out.w);
    let a = out.w.t_matmul(&p);
    let offset = match cfg.origin {
        Origin::ClassMean => vec![0.0; k],
        // A ḡ equals Bᵀ f̄ with f̄ the mean reduced coordinate.
        Origin::GlobalMean => out.w.t_matvec(&fmean),
    };
    Ok(KernelModel {
        a,
        b: out.w,
        train_x,
        scaler,
        spec,
        ginvhalf: p,
        retained_rank: r,
        offset,
        config: cfg.clone(),
        objective_trace: out.trace,
        objective,
        iterations: out.iterations,
        converged: out.converged,
        degenerate: out.degenerate,
    })
}

/// `y_k(x) = Σ_j α_kj k(x_j, x) − offset_k` for each row of `x`.
pub fn kernel_project(model: &KernelModel, x: &Matrix) -> Result<Matrix> {
    x.ensure_finite("projection input")?;
    let xs = model.scaler.apply(x)?;
    let kx = cross_gram(&xs, &model.train_x, model.spec)?;
    let mut y = kx.matmul_t(&model.a);
    for i in 0..y.rows() {
        for (v, o) in y.row_mut(i).iter_mut().zip(&model.offset) {
            *v -= o;
        }
    }
    Ok(y)
}

fn kernel_scores(a: &Matrix, data: &Dataset, g: &Matrix) -> Result<Matrix> {
    let n = data.len();
    if g.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            what: "gram size",
            expected: n,
            found: g.rows(),
        });
    }
    if a.shape() != (data.num_classes(), n) {
        return Err(Error::DimensionMismatch {
            what: "coefficient matrix columns",
            expected: n,
            found: a.cols(),
        });
    }
    Ok(a.matmul(g))
}

fn class_rows(s: &Matrix, data: &Dataset, k: usize) -> Vec<f64> {
    data.class_index()[k].iter().map(|&i| s[(k, i)]).collect()
}

/// Kernel form of the quadratic auxiliary update, with scores
/// `s_i = Σ_j α_kj G_ji`.
pub fn update_z_kernel_quad(a: &Matrix, data: &Dataset, g: &Matrix) -> Result<AuxiliaryZ> {
    let s = kernel_scores(a, data, g)?;
    let values = (0..data.num_classes())
        .map(|k| crate::fit::zupdate_quad(&class_rows(&s, data, k)))
        .collect();
    Ok(AuxiliaryZ { values })
}

/// Kernel form of the absolute-value auxiliary update.
pub fn update_z_kernel_abs(
    a: &Matrix,
    data: &Dataset,
    g: &Matrix,
    epsilon: f64,
) -> Result<AuxiliaryZ> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let s = kernel_scores(a, data, g)?;
    let values = (0..data.num_classes())
        .map(|k| crate::fit::zupdate_abs(&class_rows(&s, data, k), epsilon, k))
        .collect::<Result<_>>()?;
    Ok(AuxiliaryZ { values })
}

/// Certificate of a quadratic kernel fit, run on the reduced frame `B` with
/// `H_k` the class scatter of the reduced coordinates.
pub fn kernel_certificate(
    model: &KernelModel,
    data: &Dataset,
    tol: Option<f64>,
) -> Result<CertificateReport> {
    if model.config.variant != Variant::Quad {
        return Err(Error::InvalidArgument(
            "the certificate applies to the quadratic variant".into(),
        ));
    }
    if data.len() != model.train_x.rows() {
        return Err(Error::DimensionMismatch {
            what: "certificate dataset rows",
            expected: model.train_x.rows(),
            found: data.len(),
        });
    }
    let f = model.reduced_features()?;
    let h = match model.config.origin {
        Origin::ClassMean => data.with_features(f)?.class_scatters(),
        Origin::GlobalMean => {
            let means = f.column_means();
            let c = Matrix::from_fn(f.rows(), f.cols(), |i, j| f[(i, j)] - means[j]);
            class_second_moments(&c, data.class_index())
        }
    };
    certificate_from_scatters(&model.b, &h, tol)
}
