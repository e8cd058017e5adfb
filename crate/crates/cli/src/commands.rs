use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use catspace::certificate::{model_certificate, CertificateReport};
use catspace::eval::{
    fit_reducer, run_cell, BenchmarkConfig, BenchmarkRow, Classifier, Method, MethodSpec, Reducer,
    SplitPlan,
};
use catspace::fit::{FitConfig, Origin, Variant};
use catspace::kernel::{kernel_certificate, KernelSpec};
use catspace::linalg::Matrix;
use catspace::{Dataset, Scaling};

use crate::csvio::{coordinates_tsv, into_labeled, load_csv, read_table, LabelColumn};
use crate::error::{CliError, CliResult};
use crate::manifest::{RunManifest, TableManifest, MANIFEST_FILE};
use crate::model_io::{load_model, parse_scaling, save_model};
use crate::svg::{panel_axes, scatter_svg};

pub const MODEL_FILE: &str = "model.bin";
pub const PROJECTION_FILE: &str = "projection.tsv";
pub const CERTIFICATE_FILE: &str = "certificate.txt";
pub const TABLE_FILE: &str = "table.tsv";

#[derive(Debug, Parser)]
#[command(
    name = "catspace",
    version,
    about = "Category-space dimensionality reduction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a reducer and write the model.
    Fit(FitArgs),
    /// Project a dataset with a saved model.
    Project(ProjectArgs),
    /// Check global optimality of a saved quadratic model.
    Certificate(CertificateArgs),
    /// Repeated-split classification benchmark.
    Benchmark(BenchmarkArgs),
    /// Scatter plots of projected data, one panel per pair of axes.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct CsvArgs {
    /// Label column: zero-based index, `last` or `none`.
    #[arg(long, default_value = "last")]
    pub label_col: LabelColumn,
    /// The first row holds column names.
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// cqs, cas, kcqs, kcas, pca, kpca, fld or kfld.
    #[arg(long, default_value = "cqs")]
    pub method: String,
    /// rbf or linear, for kernel methods.
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// class or global.
    #[arg(long)]
    pub origin: Option<String>,
    /// Shorthand for `--scaling zscore`.
    #[arg(long)]
    pub zscore: bool,
    /// none, zscore or minmax.
    #[arg(long, conflicts_with = "zscore")]
    pub scaling: Option<String>,
    /// Output dimension of pca and kpca.
    #[arg(long)]
    pub dim: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    pub data: PathBuf,
    #[command(flatten)]
    pub csv: CsvArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    pub data: PathBuf,
    #[command(flatten)]
    pub csv: CsvArgs,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CertificateArgs {
    pub data: PathBuf,
    #[command(flatten)]
    pub csv: CsvArgs,
    #[arg(long)]
    pub model: PathBuf,
    /// Eigenvalue tolerance; defaults to `1e-8 (1 + λ_max)`.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Dataset files, named after their file stem.
    pub data: Vec<PathBuf>,
    #[command(flatten)]
    pub csv: CsvArgs,
    /// JSON table description listing datasets and methods.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub model: BenchmarkModelArgs,
    #[arg(long)]
    pub repeats: Option<usize>,
    /// svm, angle or signed-angle.
    #[arg(long, default_value = "svm")]
    pub classifier: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchmarkModelArgs {
    /// Repeatable; defaults to the manifest methods or cqs.
    #[arg(long = "method")]
    pub methods: Vec<String>,
    #[arg(long)]
    pub kernel: Option<String>,
    /// Fixed rbf width instead of the cross-validated grid.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub origin: Option<String>,
    #[arg(long)]
    pub zscore: bool,
    #[arg(long, conflicts_with = "zscore")]
    pub scaling: Option<String>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    pub data: PathBuf,
    #[command(flatten)]
    pub csv: CsvArgs,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `argv` (program name first) and runs the command. Help and
/// version requests print to `out` and succeed.
pub fn run<I, S>(argv: I, out: &mut dyn Write) -> CliResult<()>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    write!(out, "{e}")?;
                    Ok(())
                }
                _ => Err(CliError::Usage(
                    e.render().to_string().trim_end().to_string(),
                )),
            };
        }
    };
    let args = argv.get(1..).unwrap_or_default().to_vec();
    match &cli.command {
        Command::Fit(a) => cmd_fit(a, args, out),
        Command::Project(a) => cmd_project(a, args, out),
        Command::Certificate(a) => cmd_certificate(a, args, out),
        Command::Benchmark(a) => cmd_benchmark(a, args, out),
        Command::Plot(a) => cmd_plot(a, args, out),
    }
}

fn parse_method(s: &str) -> CliResult<Method> {
    Method::parse(s).ok_or_else(|| CliError::Usage(format!("unknown method `{s}`")))
}

fn parse_origin(s: Option<&str>) -> CliResult<Option<Origin>> {
    match s {
        None => Ok(None),
        Some("class") => Ok(Some(Origin::ClassMean)),
        Some("global") => Ok(Some(Origin::GlobalMean)),
        Some(o) => Err(CliError::Usage(format!(
            "origin must be `class` or `global`, got `{o}`"
        ))),
    }
}

fn scaling_option(zscore: bool, scaling: Option<&str>) -> CliResult<Option<Scaling>> {
    if zscore {
        return Ok(Some(Scaling::ZScore));
    }
    scaling
        .map(|s| parse_scaling(s).ok_or_else(|| CliError::Usage(format!("unknown scaling `{s}`"))))
        .transpose()
}

/// Explicit kernel choice. `None` means rbf without a fixed width.
fn kernel_option(kernel: Option<&str>, sigma: Option<f64>) -> CliResult<Option<KernelSpec>> {
    match (kernel.unwrap_or("rbf"), sigma) {
        ("rbf", Some(sigma)) => Ok(Some(KernelSpec::Rbf { sigma })),
        ("rbf", None) => Ok(None),
        ("linear", _) => Ok(Some(KernelSpec::Linear)),
        (k, _) => Err(CliError::Usage(format!(
            "kernel must be `rbf` or `linear`, got `{k}`"
        ))),
    }
}

fn kernel_name(k: KernelSpec) -> String {
    match k {
        KernelSpec::Rbf { sigma } => format!("rbf(sigma={sigma:?})"),
        KernelSpec::Linear => "linear".into(),
        KernelSpec::Polynomial { degree, offset } => {
            format!("polynomial(degree={degree:?},offset={offset:?})")
        }
    }
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn manifest(command: &str, args: Vec<String>, datasets: Vec<String>) -> RunManifest {
    RunManifest {
        command: command.into(),
        args,
        datasets,
        method: None,
        kernel: None,
        config: serde_json::Value::Null,
        seed: 0,
        outputs: Vec::new(),
        version: env!("CARGO_PKG_VERSION").into(),
    }
}

fn cmd_fit(a: &FitArgs, args: Vec<String>, out: &mut dyn Write) -> CliResult<()> {
    let m = &a.model;
    let method = parse_method(&m.method)?;
    let kernel = if method.is_kernel() {
        kernel_option(m.kernel.as_deref(), m.sigma)?.ok_or_else(|| {
            CliError::Usage(format!(
                "{} with an rbf kernel needs --sigma",
                method.name()
            ))
        })?
    } else {
        KernelSpec::Linear
    };
    let defaults = FitConfig::default();
    let fit = FitConfig {
        variant: method.variant().unwrap_or_default(),
        origin: parse_origin(m.origin.as_deref())?.unwrap_or(defaults.origin),
        epsilon: m.epsilon.unwrap_or(defaults.epsilon),
        delta: m.delta.unwrap_or(defaults.delta),
        max_iter: m.max_iter.unwrap_or(defaults.max_iter),
        seed: m.seed,
        scaling: scaling_option(m.zscore, m.scaling.as_deref())?.unwrap_or(defaults.scaling),
    };
    fit.validate()?;
    let spec = MethodSpec {
        method,
        classifier: Classifier::Svm,
        scaling: fit.scaling,
        origin: fit.origin,
        epsilon: fit.epsilon,
        kernel,
        sigma_grid: Vec::new(),
        dim: m.dim,
    };
    let data = load_csv(&a.data, a.csv.label_col, a.csv.header)?;
    let model = fit_reducer(&data.dataset, &spec, kernel, &fit)?;

    ensure_dir(&a.out)?;
    save_model(&a.out.join(MODEL_FILE), &model)?;
    let mut man = manifest("fit", args, vec![a.data.display().to_string()]);
    man.method = Some(method.name().into());
    man.kernel = method.is_kernel().then(|| kernel_name(kernel));
    man.seed = fit.seed;
    man.config = json!({
        "variant": format!("{:?}", fit.variant).to_lowercase(),
        "origin": if fit.origin == Origin::ClassMean { "class" } else { "global" },
        "epsilon": fit.epsilon,
        "delta": fit.delta,
        "max_iter": fit.max_iter,
        "scaling": format!("{:?}", fit.scaling).to_lowercase(),
        "label_col": a.csv.label_col.to_string(),
        "header": a.csv.header,
        "dim": m.dim,
        "classes": data.class_names,
    });
    man.outputs = vec![MODEL_FILE.into(), MANIFEST_FILE.into()];
    man.write(&a.out)?;

    writeln!(out, "method\t{}", method.name())?;
    let status = match &model {
        Reducer::Linear(l) => Some((l.objective, l.iterations, l.converged, l.degenerate)),
        Reducer::Kernel(k) => Some((k.objective, k.iterations, k.converged, k.degenerate)),
        Reducer::Baseline(b) => {
            writeln!(out, "output_dim\t{}", b.output_dim())?;
            let values: Vec<String> = b.eigenvalues.iter().map(|v| format!("{v:?}")).collect();
            writeln!(out, "eigenvalues\t{}", values.join(","))?;
            None
        }
    };
    if let Some((objective, iterations, converged, degenerate)) = status {
        writeln!(out, "objective\t{objective:?}")?;
        writeln!(out, "iterations\t{iterations}")?;
        writeln!(out, "converged\t{converged}")?;
        writeln!(out, "degenerate\t{degenerate}")?;
        if !converged {
            return Err(CliError::Numerical(format!(
                "no convergence within {iterations} iterations; model written to {}",
                a.out.display()
            )));
        }
    }
    Ok(())
}

fn model_dim(model: &Reducer) -> usize {
    match model {
        Reducer::Linear(m) => m.dim(),
        Reducer::Kernel(m) => m.train_x.cols(),
        Reducer::Baseline(m) => m.scaler.dim(),
    }
}

fn check_dim(model: &Reducer, x: &Matrix) -> CliResult<()> {
    let d = model_dim(model);
    if x.cols() != d {
        return Err(CliError::Data(format!(
            "model expects {d} features, data has {}",
            x.cols()
        )));
    }
    Ok(())
}

/// Objective of a fitted frame evaluated from the projected coordinates of
/// its training data: per class, scores along the class axis, centred on the
/// class mean for the class origin.
pub fn objective_from_coords(y: &Matrix, data: &Dataset, cfg: &FitConfig) -> f64 {
    let mut total = 0.0;
    for (k, idx) in data.class_index().iter().enumerate() {
        let s: Vec<f64> = idx.iter().map(|&i| y[(i, k)]).collect();
        let m = match cfg.origin {
            Origin::ClassMean => s.iter().sum::<f64>() / s.len() as f64,
            Origin::GlobalMean => 0.0,
        };
        for v in s {
            let c = v - m;
            total += match cfg.variant {
                Variant::Quad => -0.5 * c * c,
                Variant::Abs => -c.hypot(cfg.epsilon),
            };
        }
    }
    total
}

fn cmd_project(a: &ProjectArgs, args: Vec<String>, out: &mut dyn Write) -> CliResult<()> {
    let model = load_model(&a.model)?;
    let table = read_table(&a.data, a.csv.label_col, a.csv.header)?;
    check_dim(&model, &table.x)?;
    let y = model.project(&table.x)?;
    ensure_dir(&a.out)?;
    let labels = table
        .labels
        .as_deref()
        .map(|l| (l, table.class_names.as_slice()));
    write_file(&a.out.join(PROJECTION_FILE), coordinates_tsv(&y, labels))?;

    let cfg = match &model {
        Reducer::Linear(m) => Some(&m.config),
        Reducer::Kernel(m) => Some(&m.config),
        Reducer::Baseline(_) => None,
    };
    if let (Some(cfg), Some(_)) = (cfg, &table.labels) {
        if table.class_names.len() == y.cols() {
            let data = into_labeled(table.clone())?;
            writeln!(
                out,
                "objective\t{:?}",
                objective_from_coords(&y, &data.dataset, cfg)
            )?;
        }
    }
    writeln!(out, "rows\t{}", y.rows())?;
    writeln!(out, "components\t{}", y.cols())?;

    let mut man = manifest("project", args, vec![a.data.display().to_string()]);
    man.config = json!({
        "model": a.model.display().to_string(),
        "label_col": a.csv.label_col.to_string(),
        "header": a.csv.header,
    });
    man.outputs = vec![PROJECTION_FILE.into(), MANIFEST_FILE.into()];
    man.write(&a.out)
}

/// `key=value` lines for every report field.
pub fn format_certificate(r: &CertificateReport) -> String {
    format!(
        "first_order_residual={:e}\ntangent_max_eig={:e}\nfull_max_eig={:e}\ntolerance={:e}\nis_stationary={}\nis_second_order_necessary={}\nis_global_certified={}\n",
        r.first_order_residual,
        r.tangent_max_eig,
        r.full_max_eig,
        r.tolerance,
        r.is_stationary,
        r.is_second_order_necessary,
        r.is_global_certified
    )
}

fn cmd_certificate(a: &CertificateArgs, args: Vec<String>, out: &mut dyn Write) -> CliResult<()> {
    let model = load_model(&a.model)?;
    let data = load_csv(&a.data, a.csv.label_col, a.csv.header)?;
    check_dim(&model, data.dataset.x())?;
    let report = match &model {
        Reducer::Linear(m) if m.config.variant == Variant::Quad => {
            model_certificate(m, &data.dataset, a.tol)?
        }
        Reducer::Kernel(m) if m.config.variant == Variant::Quad => {
            kernel_certificate(m, &data.dataset, a.tol)?
        }
        _ => {
            return Err(CliError::Usage(
                "the certificate applies to cqs and kcqs models only".into(),
            ))
        }
    };
    let text = format_certificate(&report);
    out.write_all(text.as_bytes())?;
    if let Some(dir) = &a.out {
        ensure_dir(dir)?;
        write_file(&dir.join(CERTIFICATE_FILE), &text)?;
        let mut man = manifest("certificate", args, vec![a.data.display().to_string()]);
        man.config = json!({
            "model": a.model.display().to_string(),
            "tol": a.tol,
            "label_col": a.csv.label_col.to_string(),
            "header": a.csv.header,
        });
        man.outputs = vec![CERTIFICATE_FILE.into(), MANIFEST_FILE.into()];
        man.write(dir)?;
    }
    Ok(())
}

/// Benchmark table as tab-separated text.
pub fn format_table(rows: &[BenchmarkRow]) -> String {
    let mut s = String::from("dataset\tmethod\tmean_acc\tsd\trepeats\n");
    for r in rows {
        s.push_str(&format!(
            "{}\t{}\t{:.2}\t{:.2}\t{}\n",
            r.dataset, r.method, r.mean_acc, r.sd, r.repeats
        ));
    }
    s
}

/// Runs every (dataset, method) cell in parallel. Rows come back in
/// dataset-major order regardless of scheduling.
pub fn run_table(
    datasets: &[(String, Dataset)],
    specs: &[MethodSpec],
    cfg: &BenchmarkConfig,
) -> Vec<BenchmarkRow> {
    let cells: Vec<(usize, usize)> = (0..datasets.len())
        .flat_map(|d| (0..specs.len()).map(move |m| (d, m)))
        .collect();
    cells
        .par_iter()
        .map(|&(d, m)| run_cell(&datasets[d].0, &datasets[d].1, &specs[m], cfg))
        .collect()
}

fn cmd_benchmark(a: &BenchmarkArgs, args: Vec<String>, out: &mut dyn Write) -> CliResult<()> {
    let table = a.manifest.as_deref().map(TableManifest::read).transpose()?;
    let mut datasets: Vec<(String, Dataset)> = Vec::new();
    let mut sources = Vec::new();
    let mut skipped = Vec::new();
    if let (Some(t), Some(path)) = (&table, &a.manifest) {
        let base = path.parent().unwrap_or(Path::new("."));
        for entry in &t.datasets {
            let file = base.join(&entry.path);
            if !file.exists() {
                eprintln!(
                    "catspace: skipping {}: {} not found",
                    entry.name,
                    file.display()
                );
                skipped.push(entry.name.clone());
                continue;
            }
            let label: LabelColumn = entry.label_col.parse().map_err(CliError::Usage)?;
            datasets.push((
                entry.name.clone(),
                load_csv(&file, label, entry.header)?.dataset,
            ));
            sources.push(file.display().to_string());
        }
    }
    for path in &a.data {
        let name = path.file_stem().map_or_else(
            || path.display().to_string(),
            |s| s.to_string_lossy().into_owned(),
        );
        datasets.push((name, load_csv(path, a.csv.label_col, a.csv.header)?.dataset));
        sources.push(path.display().to_string());
    }
    if datasets.is_empty() {
        return Err(CliError::Usage("no datasets given".into()));
    }

    let m = &a.model;
    let names: Vec<String> = if !m.methods.is_empty() {
        m.methods.clone()
    } else if let Some(t) = &table {
        t.methods.clone()
    } else {
        vec!["cqs".into()]
    };
    let classifier = match a.classifier.as_str() {
        "svm" => Classifier::Svm,
        "angle" => Classifier::Angle { signed: false },
        "signed-angle" => Classifier::Angle { signed: true },
        c => return Err(CliError::Usage(format!("unknown classifier `{c}`"))),
    };
    let origin = parse_origin(m.origin.as_deref())?;
    let scaling = scaling_option(m.zscore, m.scaling.as_deref())?;
    let kernel = kernel_option(m.kernel.as_deref(), m.sigma)?;
    let mut specs = Vec::new();
    for n in &names {
        let mut spec = MethodSpec::standard(parse_method(n)?);
        spec.classifier = classifier;
        if let Some(o) = origin {
            spec.origin = o;
        }
        if let Some(s) = scaling {
            spec.scaling = s;
        }
        if let Some(e) = m.epsilon {
            spec.epsilon = e;
        }
        if let (Some(k), true) = (kernel, spec.method.is_kernel()) {
            spec.kernel = k;
            spec.sigma_grid.clear();
        }
        specs.push(spec);
    }

    let defaults = BenchmarkConfig::default();
    let seed = m
        .seed
        .or(table.as_ref().map(|t| t.seed))
        .unwrap_or(defaults.seed);
    let repeats = a
        .repeats
        .or(table.as_ref().map(|t| t.repeats))
        .unwrap_or(defaults.plan.repeats);
    let cfg = BenchmarkConfig {
        plan: SplitPlan {
            repeats,
            seed,
            ..SplitPlan::default()
        },
        delta: m.delta.unwrap_or(defaults.delta),
        max_iter: m.max_iter.unwrap_or(defaults.max_iter),
        seed,
    };
    let rows = run_table(&datasets, &specs, &cfg);

    ensure_dir(&a.out)?;
    let text = format_table(&rows);
    write_file(&a.out.join(TABLE_FILE), &text)?;
    let mut man = manifest("benchmark", args, sources);
    man.method = Some(
        specs
            .iter()
            .map(MethodSpec::label)
            .collect::<Vec<_>>()
            .join(","),
    );
    man.seed = seed;
    man.config = json!({
        "repeats": repeats,
        "train_fraction": cfg.plan.train_fraction,
        "delta": cfg.delta,
        "max_iter": cfg.max_iter,
        "classifier": a.classifier,
        "skipped_datasets": skipped,
        "sigmas": rows.iter().map(|r| json!({"dataset": r.dataset, "method": r.method, "sigmas": r.sigmas})).collect::<Vec<_>>(),
    });
    man.outputs = vec![TABLE_FILE.into(), MANIFEST_FILE.into()];
    man.write(&a.out)?;
    out.write_all(text.as_bytes())?;

    for r in &rows {
        for (rep, msg) in &r.failures {
            eprintln!(
                "catspace: {} {} repeat {rep} failed: {msg}",
                r.dataset, r.method
            );
        }
    }
    if let Some(r) = rows.iter().find(|r| r.repeats == 0) {
        return Err(CliError::Numerical(format!(
            "every repeat of {} {} failed",
            r.dataset, r.method
        )));
    }
    Ok(())
}

fn cmd_plot(a: &PlotArgs, args: Vec<String>, out: &mut dyn Write) -> CliResult<()> {
    let model = load_model(&a.model)?;
    let data = load_csv(&a.data, a.csv.label_col, a.csv.header)?;
    check_dim(&model, data.dataset.x())?;
    let y = model.project(data.dataset.x())?;
    if y.cols() < 2 {
        return Err(CliError::Usage(
            "plotting needs at least two components".into(),
        ));
    }
    let names: Vec<String> = if y.cols() == data.class_names.len() {
        data.class_names.clone()
    } else {
        (1..=y.cols()).map(|k| format!("y{k}")).collect()
    };
    ensure_dir(&a.out)?;
    let mut outputs = Vec::new();
    for (i, j) in panel_axes(y.cols()) {
        let file = format!("scatter_{}_{}.svg", i + 1, j + 1);
        write_file(
            &a.out.join(&file),
            scatter_svg(&y, data.dataset.labels(), (i, j), &names)?,
        )?;
        writeln!(out, "{file}")?;
        outputs.push(file);
    }
    outputs.push(MANIFEST_FILE.into());
    let mut man = manifest("plot", args, vec![a.data.display().to_string()]);
    man.config = json!({
        "model": a.model.display().to_string(),
        "label_col": a.csv.label_col.to_string(),
        "header": a.csv.header,
    });
    man.outputs = outputs;
    man.write(&a.out)
}
