//! Reference reducers: PCA, Fisher discriminant and their kernel forms.

use alloc::vec::Vec;

use crate::data::{Dataset, FeatureScaler, Scaling};
use crate::error::{Error, Result};
use crate::kernel::{cross_gram, gram, KernelSpec};
use crate::linalg::{generalized_sym_eig, sym_eig, Matrix};
use crate::math;

/// Relative gap below which neighbouring eigenvalues count as tied.
const TIE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Pca,
    Kpca,
    Fld,
    Kfld,
}

/// Data a kernel baseline needs to project new points.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTerms {
    pub spec: KernelSpec,
    /// Scaled training patterns.
    pub train_x: Matrix,
    /// Column means of the training Gram matrix.
    pub gram_col_means: Vec<f64>,
    /// Mean of all training Gram entries.
    pub gram_mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineModel {
    pub kind: BaselineKind,
    pub scaler: FeatureScaler,
    /// Training mean in scaled coordinates (linear kinds).
    pub mean: Vec<f64>,
    /// `D × d` directions (linear kinds) or `N × d` coefficients (kernel
    /// kinds).
    pub projection: Matrix,
    /// Variance (pca, kpca) or discriminant ratio (fld, kfld) per direction.
    pub eigenvalues: Vec<f64>,
    /// Per-direction flag: tied eigenvalue (pca, kpca) or vanishing ratio
    /// (fld, kfld), so the direction is not uniquely determined.
    pub degenerate: Vec<bool>,
    /// Within-class scatter was singular before the ridge (fld, kfld).
    pub singular_scatter: bool,
    pub kernel: Option<KernelTerms>,
}

impl BaselineModel {
    pub fn output_dim(&self) -> usize {
        self.projection.cols()
    }
}

fn tie_flags(values: &[f64], d: usize) -> Vec<bool> {
    let top = values
        .first()
        .map_or(0.0, |v| math::abs(*v))
        .max(f64::MIN_POSITIVE);
    (0..d)
        .map(|j| {
            let near = |o: usize| math::abs(values[j] - values[o]) <= TIE_TOL * top;
            (j > 0 && near(j - 1)) || (j + 1 < values.len() && near(j + 1))
        })
        .collect()
}

fn centred(x: &Matrix, mean: &[f64]) -> Matrix {
    Matrix::from_fn(x.rows(), x.cols(), |i, j| x[(i, j)] - mean[j])
}

/// Top `d` eigenvectors of the total covariance.
pub fn pca_fit(data: &Dataset, d: usize, scaling: Scaling) -> Result<BaselineModel> {
    let dim = data.dim();
    if d == 0 || d > dim {
        return Err(Error::RankDeficient {
            requested: d,
            available: dim,
        });
    }
    let scaler = FeatureScaler::fit(data.x(), scaling);
    let x = scaler.apply(data.x())?;
    let mean = x.column_means();
    let c = centred(&x, &mean);
    let cov = c.t_matmul(&c).scale(1.0 / data.len() as f64).symmetrized();
    let eig = sym_eig(&cov)?;
    let top = eig.values[0].max(0.0);
    let rank = eig
        .values
        .iter()
        .filter(|&&l| l > 1e-12 * top && l > 0.0)
        .count();
    if d > rank && top > 0.0 {
        return Err(Error::RankDeficient {
            requested: d,
            available: rank,
        });
    }
    Ok(BaselineModel {
        kind: BaselineKind::Pca,
        scaler,
        mean,
        projection: eig.vectors.leading_columns(d),
        degenerate: tie_flags(&eig.values, d),
        eigenvalues: eig.values[..d].to_vec(),
        singular_scatter: false,
        kernel: None,
    })
}

/// `K − 1` generalised eigenvectors of between- against ridged
/// within-class scatter.
pub fn fld_fit(data: &Dataset, scaling: Scaling) -> Result<BaselineModel> {
    let dim = data.dim();
    let k = data.num_classes();
    let scaler = FeatureScaler::fit(data.x(), scaling);
    let x = scaler.apply(data.x())?;
    let scaled = data.with_features(x.clone())?;
    let mean = x.column_means();
    let means = scaled.class_means();
    let mut sw = Matrix::zeros(dim, dim);
    for r in scaled.class_scatters() {
        sw = sw.add(&r);
    }
    let mut sb = Matrix::zeros(dim, dim);
    for (c, idx) in scaled.class_index().iter().enumerate() {
        let diff: Vec<f64> = (0..dim).map(|j| means[(c, j)] - mean[j]).collect();
        let n = idx.len() as f64;
        for a in 0..dim {
            for b in 0..dim {
                sb[(a, b)] += n * diff[a] * diff[b];
            }
        }
    }
    let (eig, singular) = ridged_discriminant(&sb, &sw)?;
    let d = (k - 1).min(dim);
    Ok(BaselineModel {
        kind: BaselineKind::Fld,
        scaler,
        mean,
        projection: eig.vectors.leading_columns(d),
        degenerate: ratio_flags(&eig.values, d),
        eigenvalues: eig.values[..d].to_vec(),
        singular_scatter: singular,
        kernel: None,
    })
}

/// Solves `S_b v = λ (S_w + ρI) v` with `ρ = 1e-8·trace(S_w)/n`.
fn ridged_discriminant(sb: &Matrix, sw: &Matrix) -> Result<(crate::linalg::SymEig, bool)> {
    let n = sw.rows();
    let tr = sw.trace();
    let ridge = if tr > 0.0 { 1e-8 * tr / n as f64 } else { 1e-8 };
    let sw_eig = sym_eig(&sw.symmetrized())?;
    let top = sw_eig.values[0].max(0.0);
    let singular = sw_eig.values.last().map_or(true, |&l| l <= 1e-10 * top);
    let c = sw.add(&Matrix::identity(n).scale(ridge)).symmetrized();
    Ok((generalized_sym_eig(&sb.symmetrized(), &c)?, singular))
}

fn ratio_flags(values: &[f64], d: usize) -> Vec<bool> {
    let top = values.first().copied().unwrap_or(0.0).max(0.0);
    (0..d)
        .map(|j| !(values[j] > 1e-10 * top) || top == 0.0)
        .collect()
}

fn kernel_terms(g: &Matrix, spec: KernelSpec, train_x: Matrix) -> KernelTerms {
    let gram_col_means = g.column_means();
    let gram_mean = gram_col_means.iter().sum::<f64>() / gram_col_means.len().max(1) as f64;
    KernelTerms {
        spec,
        train_x,
        gram_col_means,
        gram_mean,
    }
}

/// Kernel PCA on the double-centred Gram matrix. Coefficients are
/// `v_j / √λ_j`, so projections have unit-norm feature-space directions.
pub fn kpca_fit(
    data: &Dataset,
    spec: KernelSpec,
    d: usize,
    scaling: Scaling,
) -> Result<BaselineModel> {
    let n = data.len();
    let scaler = FeatureScaler::fit(data.x(), scaling);
    let x = scaler.apply(data.x())?;
    let g = gram(&x, spec)?.g;
    let terms = kernel_terms(&g, spec, x);
    let gc = Matrix::from_fn(n, n, |i, j| {
        g[(i, j)] - terms.gram_col_means[i] - terms.gram_col_means[j] + terms.gram_mean
    })
    .symmetrized();
    let eig = sym_eig(&gc)?;
    let top = eig.values[0].max(0.0);
    let rank = eig
        .values
        .iter()
        .filter(|&&l| l > 1e-12 * top && l > 0.0)
        .count();
    if d == 0 || d > rank {
        return Err(Error::RankDeficient {
            requested: d,
            available: rank,
        });
    }
    let alpha = Matrix::from_fn(n, d, |i, j| eig.vectors[(i, j)] / math::sqrt(eig.values[j]));
    Ok(BaselineModel {
        kind: BaselineKind::Kpca,
        scaler,
        mean: Vec::new(),
        projection: alpha,
        degenerate: tie_flags(&eig.values, d),
        eigenvalues: eig.values[..d].iter().map(|l| l / n as f64).collect(),
        singular_scatter: false,
        kernel: Some(terms),
    })
}

/// Multi-class kernel Fisher discriminant with coefficient-space scatters
/// and a ridge on the within-class term.
pub fn kfld_fit(data: &Dataset, spec: KernelSpec, scaling: Scaling) -> Result<BaselineModel> {
    let n = data.len();
    let k = data.num_classes();
    let scaler = FeatureScaler::fit(data.x(), scaling);
    let x = scaler.apply(data.x())?;
    let g = gram(&x, spec)?.g;
    let terms = kernel_terms(&g, spec, x);
    let mut between = Matrix::zeros(n, n);
    let mut within = Matrix::zeros(n, n);
    for idx in data.class_index() {
        let nk = idx.len() as f64;
        let gk = g.select_columns(idx);
        let mk: Vec<f64> = (0..n).map(|i| gk.row(i).iter().sum::<f64>() / nk).collect();
        let diff: Vec<f64> = mk
            .iter()
            .zip(&terms.gram_col_means)
            .map(|(a, b)| a - b)
            .collect();
        // G_k (I − 11ᵀ/n_k) G_kᵀ, built from class-centred columns.
        let gc = Matrix::from_fn(n, idx.len(), |i, j| gk[(i, j)] - mk[i]);
        within = within.add(&gc.matmul_t(&gc));
        for a in 0..n {
            for b in 0..n {
                between[(a, b)] += nk * diff[a] * diff[b];
            }
        }
    }
    let (eig, singular) = ridged_discriminant(&between, &within)?;
    let d = (k - 1).min(n);
    Ok(BaselineModel {
        kind: BaselineKind::Kfld,
        scaler,
        mean: Vec::new(),
        projection: eig.vectors.leading_columns(d),
        degenerate: ratio_flags(&eig.values, d),
        eigenvalues: eig.values[..d].to_vec(),
        singular_scatter: singular,
        kernel: Some(terms),
    })
}

/// Projects the rows of `x` onto the fitted directions.
pub fn baseline_project(model: &BaselineModel, x: &Matrix) -> Result<Matrix> {
    x.ensure_finite("projection input")?;
    let xs = model.scaler.apply(x)?;
    match (&model.kernel, model.kind) {
        (None, _) => Ok(centred(&xs, &model.mean).matmul(&model.projection)),
        (Some(t), BaselineKind::Kpca) => {
            let kx = cross_gram(&xs, &t.train_x, t.spec)?;
            let n = t.train_x.rows();
            let kc = Matrix::from_fn(kx.rows(), n, |i, j| {
                let row_mean = kx.row(i).iter().sum::<f64>() / n as f64;
                kx[(i, j)] - row_mean - t.gram_col_means[j] + t.gram_mean
            });
            Ok(kc.matmul(&model.projection))
        }
        (Some(t), _) => {
            let kx = cross_gram(&xs, &t.train_x, t.spec)?;
            let mut y = kx.matmul(&model.projection);
            let shift = model.projection.t_matvec(&t.gram_col_means);
            for i in 0..y.rows() {
                for (v, s) in y.row_mut(i).iter_mut().zip(&shift) {
                    *v -= s;
                }
            }
            Ok(y)
        }
    }
}

/// Output dimension used when none is given: `K` for pca and kpca, `K − 1`
/// for the discriminants.
pub fn default_dim(kind: BaselineKind, num_classes: usize) -> usize {
    match kind {
        BaselineKind::Pca | BaselineKind::Kpca => num_classes,
        BaselineKind::Fld | BaselineKind::Kfld => num_classes.saturating_sub(1).max(1),
    }
}
