use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::split::{derive_seed, split, stratified_folds, SplitPlan};
use super::svm::{svm_predict, svm_train_cv};
use super::{accuracy, angle_classify, mean_sd};
use crate::baselines::{
    baseline_project, default_dim, fld_fit, kfld_fit, kpca_fit, pca_fit, BaselineKind,
    BaselineModel,
};
use crate::data::{Dataset, Scaling};
use crate::error::{Error, Result};
use crate::fit::{fit_linear, project, FitConfig, LinearModel, Origin, Variant};
use crate::kernel::{fit_kernel, kernel_project, KernelModel, KernelSpec};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    Cqs,
    Cas,
    Kcqs,
    Kcas,
    Pca,
    Kpca,
    Fld,
    Kfld,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Cqs,
        Method::Cas,
        Method::Kcqs,
        Method::Kcas,
        Method::Pca,
        Method::Kpca,
        Method::Fld,
        Method::Kfld,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Cqs => "cqs",
            Method::Cas => "cas",
            Method::Kcqs => "kcqs",
            Method::Kcas => "kcas",
            Method::Pca => "pca",
            Method::Kpca => "kpca",
            Method::Fld => "fld",
            Method::Kfld => "kfld",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|m| m.name() == s)
    }

    pub fn is_kernel(self) -> bool {
        matches!(
            self,
            Method::Kcqs | Method::Kcas | Method::Kpca | Method::Kfld
        )
    }

    /// Variant of the category-space methods.
    pub fn variant(self) -> Option<Variant> {
        match self {
            Method::Cqs | Method::Kcqs => Some(Variant::Quad),
            Method::Cas | Method::Kcas => Some(Variant::Abs),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classifier {
    /// One-vs-all linear SVM with cross-validated `C`.
    Svm,
    /// Nearest category axis by angle.
    Angle { signed: bool },
}

/// One benchmark column: reducer, preprocessing and classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    pub method: Method,
    pub classifier: Classifier,
    pub scaling: Scaling,
    pub origin: Origin,
    pub epsilon: f64,
    /// Kernel of the kernel methods. An rbf width is replaced by the
    /// validated choice from `sigma_grid` when the grid is non-empty.
    pub kernel: KernelSpec,
    pub sigma_grid: Vec<f64>,
    /// Output dimension of pca and kpca; defaults to `K`.
    pub dim: Option<usize>,
}

impl MethodSpec {
    /// Protocol defaults: features min-max scaled on the training half,
    /// global-mean origin, SVM classification, and for kernel methods an rbf
    /// width chosen from `{0.1, 0.2, 0.4, 0.8}`.
    pub fn standard(method: Method) -> Self {
        let kernel = method.is_kernel();
        Self {
            method,
            classifier: Classifier::Svm,
            scaling: Scaling::MinMax,
            origin: Origin::GlobalMean,
            epsilon: 1e-3,
            kernel: KernelSpec::Rbf { sigma: 0.4 },
            sigma_grid: if kernel {
                alloc::vec![0.1, 0.2, 0.4, 0.8]
            } else {
                Vec::new()
            },
            dim: None,
        }
    }

    /// Row label: the method name, suffixed with the classifier when it is
    /// not the SVM.
    pub fn label(&self) -> String {
        match self.classifier {
            Classifier::Svm => self.method.name().to_string(),
            Classifier::Angle { signed: false } => alloc::format!("{}-angle", self.method.name()),
            Classifier::Angle { signed: true } => {
                alloc::format!("{}-signed-angle", self.method.name())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub plan: SplitPlan,
    pub delta: f64,
    pub max_iter: usize,
    /// Base seed for initial frames and SVM coordinate order.
    pub seed: u64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            plan: SplitPlan::default(),
            delta: 1e-8,
            max_iter: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub dataset: String,
    pub method: String,
    /// Mean test accuracy in percent over successful repeats.
    pub mean_acc: f64,
    pub sd: f64,
    /// Number of successful repeats.
    pub repeats: usize,
    pub accuracies: Vec<f64>,
    /// Repeat index and error of every failed repeat.
    pub failures: Vec<(usize, String)>,
    /// rbf width used in each successful repeat (kernel methods).
    pub sigmas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchmarkTable {
    pub rows: Vec<BenchmarkRow>,
}

/// Any fitted reducer.
#[derive(Debug, Clone, PartialEq)]
pub enum Reducer {
    Linear(LinearModel),
    Kernel(KernelModel),
    Baseline(BaselineModel),
}

impl Reducer {
    pub fn project(&self, x: &Matrix) -> Result<Matrix> {
        match self {
            Reducer::Linear(m) => project(m, x),
            Reducer::Kernel(m) => kernel_project(m, x),
            Reducer::Baseline(m) => baseline_project(m, x),
        }
    }
}

/// Fits the reducer of `spec` on `train`, with `kernel` overriding the spec
/// kernel.
pub fn fit_reducer(
    train: &Dataset,
    spec: &MethodSpec,
    kernel: KernelSpec,
    fit: &FitConfig,
) -> Result<Reducer> {
    let k = train.num_classes();
    let mut cfg = fit.clone();
    cfg.scaling = spec.scaling;
    cfg.origin = spec.origin;
    cfg.epsilon = spec.epsilon;
    if let Some(v) = spec.method.variant() {
        cfg.variant = v;
    }
    Ok(match spec.method {
        Method::Cqs | Method::Cas => Reducer::Linear(fit_linear(train, &cfg)?),
        Method::Kcqs | Method::Kcas => Reducer::Kernel(fit_kernel(train, kernel, &cfg)?),
        Method::Pca => Reducer::Baseline(pca_fit(
            train,
            spec.dim.unwrap_or(default_dim(BaselineKind::Pca, k)),
            spec.scaling,
        )?),
        Method::Kpca => Reducer::Baseline(kpca_fit(
            train,
            kernel,
            spec.dim.unwrap_or(default_dim(BaselineKind::Kpca, k)),
            spec.scaling,
        )?),
        Method::Fld => Reducer::Baseline(fld_fit(train, spec.scaling)?),
        Method::Kfld => Reducer::Baseline(kfld_fit(train, kernel, spec.scaling)?),
    })
}

fn classify(
    classifier: Classifier,
    train_y: &Matrix,
    train: &Dataset,
    test_y: &Matrix,
    seed: u64,
) -> Result<Vec<usize>> {
    match classifier {
        Classifier::Svm => {
            let model = svm_train_cv(train_y, train.labels(), train.num_classes(), seed)?;
            svm_predict(&model, test_y)
        }
        Classifier::Angle { signed } => Ok(angle_classify(test_y, signed)),
    }
}

/// Fit, project both halves, classify, and score on the test half.
fn evaluate(
    train: &Dataset,
    test: &Dataset,
    spec: &MethodSpec,
    kernel: KernelSpec,
    fit: &FitConfig,
    seed: u64,
) -> Result<f64> {
    let reducer = fit_reducer(train, spec, kernel, fit)?;
    let train_y = reducer.project(train.x())?;
    let test_y = reducer.project(test.x())?;
    let pred = classify(spec.classifier, &train_y, train, &test_y, seed)?;
    Ok(accuracy(&pred, test.labels()))
}

/// Folds of the inner cross-validation that picks the rbf width.
pub const SIGMA_FOLDS: usize = 3;

/// Picks the rbf width with the best stratified cross-validated accuracy on
/// `train`, ties to the smaller width.
fn select_sigma(train: &Dataset, spec: &MethodSpec, fit: &FitConfig, seed: u64) -> Result<f64> {
    let mut grid = spec.sigma_grid.clone();
    grid.sort_by(f64::total_cmp);
    let fold = stratified_folds(
        train.labels(),
        train.num_classes(),
        SIGMA_FOLDS,
        derive_seed(seed, 0x51),
    );
    let parts: Vec<(Dataset, Dataset)> = (0..SIGMA_FOLDS)
        .map(|f| {
            let tr: Vec<usize> = (0..train.len()).filter(|&i| fold[i] != f).collect();
            let va: Vec<usize> = (0..train.len()).filter(|&i| fold[i] == f).collect();
            Ok((train.subset(&tr)?, train.subset(&va)?))
        })
        .collect::<Result<_>>()?;
    let mut best: Option<(f64, f64)> = None;
    let mut last_err = None;
    for &sigma in &grid {
        let mut total = 0.0;
        let mut ok = true;
        for (tr, va) in &parts {
            match evaluate(tr, va, spec, KernelSpec::Rbf { sigma }, fit, seed) {
                Ok(acc) => total += acc * va.len() as f64,
                Err(e) => {
                    last_err = Some(e);
                    ok = false;
                    break;
                }
            }
        }
        if ok && best.map_or(true, |(_, b)| total > b) {
            best = Some((sigma, total));
        }
    }
    match (best, last_err) {
        (Some((s, _)), _) => Ok(s),
        (None, Some(e)) => Err(e),
        (None, None) => Err(Error::InvalidArgument("empty sigma grid".into())),
    }
}

/// One repeat of one cell. Returns the accuracy and the kernel used.
pub fn run_repeat(
    data: &Dataset,
    spec: &MethodSpec,
    cfg: &BenchmarkConfig,
    repeat: usize,
) -> Result<(f64, KernelSpec)> {
    let (train, test) = split(data, &cfg.plan, repeat)?;
    let seed = derive_seed(cfg.seed, repeat as u64);
    let fit = FitConfig {
        delta: cfg.delta,
        max_iter: cfg.max_iter,
        seed,
        ..FitConfig::default()
    };
    let kernel = match spec.kernel {
        KernelSpec::Rbf { .. } if spec.method.is_kernel() && !spec.sigma_grid.is_empty() => {
            KernelSpec::Rbf {
                sigma: select_sigma(&train, spec, &fit, seed)?,
            }
        }
        k => k,
    };
    Ok((evaluate(&train, &test, spec, kernel, &fit, seed)?, kernel))
}

/// All repeats of one (dataset, method) cell. Failed repeats are recorded,
/// not propagated.
pub fn run_cell(
    name: &str,
    data: &Dataset,
    spec: &MethodSpec,
    cfg: &BenchmarkConfig,
) -> BenchmarkRow {
    let mut accuracies = Vec::new();
    let mut failures = Vec::new();
    let mut sigmas = Vec::new();
    for r in 0..cfg.plan.repeats {
        match run_repeat(data, spec, cfg, r) {
            Ok((acc, kernel)) => {
                accuracies.push(acc);
                if let KernelSpec::Rbf { sigma } = kernel {
                    if spec.method.is_kernel() {
                        sigmas.push(sigma);
                    }
                }
            }
            Err(e) => failures.push((r, e.to_string())),
        }
    }
    let (mean_acc, sd) = mean_sd(&accuracies);
    BenchmarkRow {
        dataset: name.to_string(),
        method: spec.label(),
        mean_acc,
        sd,
        repeats: accuracies.len(),
        accuracies,
        failures,
        sigmas,
    }
}

/// Every (dataset, method) cell in order: datasets outer, methods inner.
pub fn benchmark(
    datasets: &[(String, Dataset)],
    methods: &[MethodSpec],
    cfg: &BenchmarkConfig,
) -> BenchmarkTable {
    let mut rows = Vec::new();
    for (name, data) in datasets {
        for spec in methods {
            rows.push(run_cell(name, data, spec, cfg));
        }
    }
    BenchmarkTable { rows }
}
