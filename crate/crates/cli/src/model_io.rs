//! Model files.
//!
//! A model file is a UTF-8 header followed by a binary payload:
//!
//! ```text
//! CATSPACE-MODEL 1
//! kind linear
//! <key> <value>
//! matrix <name> <rows> <cols>
//! end
//! ```
//!
//! Scalars are written with the shortest decimal form that parses back to the
//! same `f64`. After the `end` line come the matrices in header order, each as
//! `rows * cols` little-endian `f64` values in row-major order.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use catspace::baselines::{BaselineKind, BaselineModel, KernelTerms};
use catspace::eval::Reducer;
use catspace::fit::{FitConfig, LinearModel, Origin, Variant};
use catspace::kernel::{KernelModel, KernelSpec};
use catspace::linalg::Matrix;
use catspace::{FeatureScaler, Scaling};

use crate::error::{CliError, CliResult};

pub const MAGIC: &str = "CATSPACE-MODEL";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Default)]
struct Container {
    scalars: Vec<(String, String)>,
    matrices: Vec<(String, Matrix)>,
}

impl Container {
    fn put(&mut self, key: &str, value: impl ToString) {
        self.scalars.push((key.to_string(), value.to_string()));
    }

    fn put_f64(&mut self, key: &str, v: f64) {
        self.put(key, format!("{v:?}"));
    }

    fn put_matrix(&mut self, name: &str, m: &Matrix) {
        self.matrices.push((name.to_string(), m.clone()));
    }

    fn put_vector(&mut self, name: &str, v: &[f64]) {
        self.put_matrix(name, &Matrix::from_fn(1, v.len(), |_, j| v[j]));
    }

    fn encode(&self) -> Vec<u8> {
        let mut head = format!("{MAGIC} {FORMAT_VERSION}\n");
        for (k, v) in &self.scalars {
            head.push_str(&format!("{k} {v}\n"));
        }
        for (name, m) in &self.matrices {
            head.push_str(&format!("matrix {name} {} {}\n", m.rows(), m.cols()));
        }
        head.push_str("end\n");
        let mut out = head.into_bytes();
        for (_, m) in &self.matrices {
            for v in m.as_slice() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    fn decode(bytes: &[u8]) -> CliResult<Decoded> {
        let bad = |m: &str| CliError::Data(format!("malformed model file: {m}"));
        let mut pos = 0;
        let mut next_line = || -> CliResult<&str> {
            let rest = &bytes[pos..];
            let end = rest
                .iter()
                .position(|&b| b == b'\n')
                .ok_or_else(|| bad("truncated header"))?;
            pos += end + 1;
            std::str::from_utf8(&rest[..end]).map_err(|_| bad("header is not UTF-8"))
        };
        let first = next_line()?;
        let version = first
            .strip_prefix(MAGIC)
            .and_then(|v| v.trim().parse::<u32>().ok())
            .ok_or_else(|| bad("missing magic line"))?;
        if version != FORMAT_VERSION {
            return Err(CliError::Data(format!(
                "unsupported model format version {version}"
            )));
        }
        let mut scalars = BTreeMap::new();
        let mut shapes = Vec::new();
        loop {
            let line = next_line()?;
            if line == "end" {
                break;
            }
            let mut parts = line.split(' ');
            let key = parts.next().unwrap_or_default();
            if key == "matrix" {
                let name = parts.next().ok_or_else(|| bad(line))?;
                let r: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| bad(line))?;
                let c: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| bad(line))?;
                shapes.push((name.to_string(), r, c));
            } else {
                let value = line.get(key.len() + 1..).ok_or_else(|| bad(line))?;
                scalars.insert(key.to_string(), value.to_string());
            }
        }
        let mut matrices = BTreeMap::new();
        for (name, r, c) in shapes {
            let len = r
                .checked_mul(c)
                .and_then(|n| n.checked_mul(8))
                .ok_or_else(|| bad("matrix too large"))?;
            let chunk = bytes
                .get(pos..pos + len)
                .ok_or_else(|| bad("truncated payload"))?;
            pos += len;
            let data = chunk
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("chunk of 8")))
                .collect();
            matrices.insert(name, Matrix::from_vec(r, c, data)?);
        }
        if pos != bytes.len() {
            return Err(bad("trailing bytes after payload"));
        }
        Ok(Decoded { scalars, matrices })
    }
}

struct Decoded {
    scalars: BTreeMap<String, String>,
    matrices: BTreeMap<String, Matrix>,
}

impl Decoded {
    fn str(&self, key: &str) -> CliResult<&str> {
        self.scalars
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| CliError::Data(format!("model file lacks `{key}`")))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> CliResult<T> {
        self.str(key)?
            .parse()
            .map_err(|_| CliError::Data(format!("model file has a malformed `{key}`")))
    }

    fn matrix(&self, name: &str) -> CliResult<Matrix> {
        self.matrices
            .get(name)
            .cloned()
            .ok_or_else(|| CliError::Data(format!("model file lacks matrix `{name}`")))
    }

    fn vector(&self, name: &str) -> CliResult<Vec<f64>> {
        Ok(self.matrix(name)?.into_vec())
    }
}

fn scaling_name(s: Scaling) -> &'static str {
    match s {
        Scaling::None => "none",
        Scaling::ZScore => "zscore",
        Scaling::MinMax => "minmax",
    }
}

pub fn parse_scaling(s: &str) -> Option<Scaling> {
    match s {
        "none" => Some(Scaling::None),
        "zscore" => Some(Scaling::ZScore),
        "minmax" => Some(Scaling::MinMax),
        _ => None,
    }
}

fn put_scaler(c: &mut Container, s: &FeatureScaler) {
    c.put_vector("scaler_offset", &s.offset);
    c.put_vector("scaler_scale", &s.scale);
}

fn get_scaler(d: &Decoded) -> CliResult<FeatureScaler> {
    Ok(FeatureScaler {
        offset: d.vector("scaler_offset")?,
        scale: d.vector("scaler_scale")?,
    })
}

fn put_kernel(c: &mut Container, spec: KernelSpec) {
    match spec {
        KernelSpec::Rbf { sigma } => {
            c.put("kernel", "rbf");
            c.put_f64("sigma", sigma);
        }
        KernelSpec::Linear => c.put("kernel", "linear"),
        KernelSpec::Polynomial { degree, offset } => {
            c.put("kernel", "polynomial");
            c.put_f64("degree", degree);
            c.put_f64("kernel_offset", offset);
        }
    }
}

fn get_kernel(d: &Decoded) -> CliResult<KernelSpec> {
    match d.str("kernel")? {
        "rbf" => Ok(KernelSpec::Rbf {
            sigma: d.parse("sigma")?,
        }),
        "linear" => Ok(KernelSpec::Linear),
        "polynomial" => Ok(KernelSpec::Polynomial {
            degree: d.parse("degree")?,
            offset: d.parse("kernel_offset")?,
        }),
        other => Err(CliError::Data(format!(
            "unknown kernel `{other}` in model file"
        ))),
    }
}

fn put_config(c: &mut Container, cfg: &FitConfig) {
    c.put(
        "variant",
        if cfg.variant == Variant::Quad {
            "quad"
        } else {
            "abs"
        },
    );
    c.put(
        "origin",
        if cfg.origin == Origin::ClassMean {
            "class"
        } else {
            "global"
        },
    );
    c.put_f64("epsilon", cfg.epsilon);
    c.put_f64("delta", cfg.delta);
    c.put("max_iter", cfg.max_iter);
    c.put("seed", cfg.seed);
    c.put("scaling", scaling_name(cfg.scaling));
}

fn get_config(d: &Decoded) -> CliResult<FitConfig> {
    let variant = match d.str("variant")? {
        "quad" => Variant::Quad,
        "abs" => Variant::Abs,
        v => {
            return Err(CliError::Data(format!(
                "unknown variant `{v}` in model file"
            )))
        }
    };
    let origin = match d.str("origin")? {
        "class" => Origin::ClassMean,
        "global" => Origin::GlobalMean,
        v => {
            return Err(CliError::Data(format!(
                "unknown origin `{v}` in model file"
            )))
        }
    };
    let scaling = parse_scaling(d.str("scaling")?)
        .ok_or_else(|| CliError::Data("unknown scaling in model file".into()))?;
    Ok(FitConfig {
        variant,
        origin,
        epsilon: d.parse("epsilon")?,
        delta: d.parse("delta")?,
        max_iter: d.parse("max_iter")?,
        seed: d.parse("seed")?,
        scaling,
    })
}

fn put_run(
    c: &mut Container,
    trace: &[f64],
    objective: f64,
    iterations: usize,
    converged: bool,
    degenerate: bool,
) {
    c.put_f64("objective", objective);
    c.put("iterations", iterations);
    c.put("converged", converged);
    c.put("degenerate", degenerate);
    c.put_vector("objective_trace", trace);
}

fn kind_name(k: BaselineKind) -> &'static str {
    match k {
        BaselineKind::Pca => "pca",
        BaselineKind::Kpca => "kpca",
        BaselineKind::Fld => "fld",
        BaselineKind::Kfld => "kfld",
    }
}

/// Serialises any fitted reducer.
pub fn encode_model(model: &Reducer) -> Vec<u8> {
    let mut c = Container::default();
    match model {
        Reducer::Linear(m) => {
            c.put("kind", "linear");
            put_config(&mut c, &m.config);
            put_run(
                &mut c,
                &m.objective_trace,
                m.objective,
                m.iterations,
                m.converged,
                m.degenerate,
            );
            put_scaler(&mut c, &m.scaler);
            c.put_vector("center", &m.center);
            c.put_matrix("w", &m.w);
        }
        Reducer::Kernel(m) => {
            c.put("kind", "kernel");
            put_kernel(&mut c, m.spec);
            put_config(&mut c, &m.config);
            put_run(
                &mut c,
                &m.objective_trace,
                m.objective,
                m.iterations,
                m.converged,
                m.degenerate,
            );
            c.put("retained_rank", m.retained_rank);
            put_scaler(&mut c, &m.scaler);
            c.put_vector("offset", &m.offset);
            c.put_matrix("a", &m.a);
            c.put_matrix("b", &m.b);
            c.put_matrix("train_x", &m.train_x);
            c.put_matrix("ginvhalf", &m.ginvhalf);
        }
        Reducer::Baseline(m) => {
            c.put("kind", kind_name(m.kind));
            c.put("singular_scatter", m.singular_scatter);
            if let Some(t) = &m.kernel {
                put_kernel(&mut c, t.spec);
                c.put_f64("gram_mean", t.gram_mean);
                c.put_matrix("train_x", &t.train_x);
                c.put_vector("gram_col_means", &t.gram_col_means);
            }
            put_scaler(&mut c, &m.scaler);
            c.put_vector("mean", &m.mean);
            c.put_matrix("projection", &m.projection);
            c.put_vector("eigenvalues", &m.eigenvalues);
            let flags: Vec<f64> = m
                .degenerate
                .iter()
                .map(|&b| f64::from(u8::from(b)))
                .collect();
            c.put_vector("degenerate_flags", &flags);
        }
    }
    c.encode()
}

pub fn decode_model(bytes: &[u8]) -> CliResult<Reducer> {
    let d = Container::decode(bytes)?;
    let kind = d.str("kind")?;
    Ok(match kind {
        "linear" => Reducer::Linear(LinearModel {
            w: d.matrix("w")?,
            scaler: get_scaler(&d)?,
            center: d.vector("center")?,
            config: get_config(&d)?,
            objective_trace: d.vector("objective_trace")?,
            objective: d.parse("objective")?,
            iterations: d.parse("iterations")?,
            converged: d.parse("converged")?,
            degenerate: d.parse("degenerate")?,
        }),
        "kernel" => Reducer::Kernel(KernelModel {
            a: d.matrix("a")?,
            b: d.matrix("b")?,
            train_x: d.matrix("train_x")?,
            scaler: get_scaler(&d)?,
            spec: get_kernel(&d)?,
            ginvhalf: d.matrix("ginvhalf")?,
            retained_rank: d.parse("retained_rank")?,
            offset: d.vector("offset")?,
            config: get_config(&d)?,
            objective_trace: d.vector("objective_trace")?,
            objective: d.parse("objective")?,
            iterations: d.parse("iterations")?,
            converged: d.parse("converged")?,
            degenerate: d.parse("degenerate")?,
        }),
        "pca" | "kpca" | "fld" | "kfld" => {
            let kind = match kind {
                "pca" => BaselineKind::Pca,
                "kpca" => BaselineKind::Kpca,
                "fld" => BaselineKind::Fld,
                _ => BaselineKind::Kfld,
            };
            let kernel = match kind {
                BaselineKind::Kpca | BaselineKind::Kfld => Some(KernelTerms {
                    spec: get_kernel(&d)?,
                    train_x: d.matrix("train_x")?,
                    gram_col_means: d.vector("gram_col_means")?,
                    gram_mean: d.parse("gram_mean")?,
                }),
                _ => None,
            };
            Reducer::Baseline(BaselineModel {
                kind,
                scaler: get_scaler(&d)?,
                mean: d.vector("mean")?,
                projection: d.matrix("projection")?,
                eigenvalues: d.vector("eigenvalues")?,
                degenerate: d
                    .vector("degenerate_flags")?
                    .iter()
                    .map(|&v| v != 0.0)
                    .collect(),
                singular_scatter: d.parse("singular_scatter")?,
                kernel,
            })
        }
        other => return Err(CliError::Data(format!("unknown model kind `{other}`"))),
    })
}

pub fn save_model(path: &Path, model: &Reducer) -> CliResult<()> {
    fs::write(path, encode_model(model))
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn load_model(path: &Path) -> CliResult<Reducer> {
    let bytes = fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    decode_model(&bytes)
}
