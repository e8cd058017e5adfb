use std::fs;
use std::path::Path;
use std::process::Command;

use catspace::baselines::{fld_fit, kfld_fit, kpca_fit, pca_fit};
use catspace::eval::Reducer;
use catspace::fit::{fit_linear, FitConfig, Origin, Variant};
use catspace::kernel::{fit_kernel, KernelSpec};
use catspace::linalg::{random_gaussian, Matrix};
use catspace::{Dataset, Scaling};
use catspace_cli::csvio::{parse_table, read_table};
use catspace_cli::model_io::{decode_model, encode_model};
use catspace_cli::svg::{scatter_svg, Viewport, HEIGHT, WIDTH};
use catspace_cli::{load_csv, CliError, LabelColumn};

const BIN: &str = env!("CARGO_BIN_EXE_catspace");

fn data_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data"))
}

fn catspace(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(BIN).args(args).output().expect("run catspace");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

/// Three classes in 5 dimensions, labels a/b/c, each a symmetric cross
/// around its centre: `±3` along axis `c`, `±1` along the other axes. Every
/// class scatter is diagonal with its largest entry on axis `c`, so the frame
/// of the first three axes is the global optimum.
fn cross_csv(dir: &Path) -> std::path::PathBuf {
    let mut text = String::new();
    for c in 0..3 {
        for j in 0..5 {
            for sign in [1.0, -1.0] {
                let row: Vec<String> = (0..5)
                    .map(|a| {
                        let centre = if a == (c + 1) % 5 { 10.0 } else { 0.0 };
                        let step = if a == j {
                            sign * if j == c { 3.0 } else { 1.0 }
                        } else {
                            0.0
                        };
                        format!("{:?}", centre + step)
                    })
                    .collect();
                text.push_str(&format!("{},{}\n", row.join(","), ["a", "b", "c"][c]));
            }
        }
    }
    let path = dir.join("cross.csv");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn csv_small_example() {
    let t = parse_table("1,2,a\n3,4,b\n5,6,a\n", LabelColumn::Last, false).unwrap();
    assert_eq!(
        t.x,
        Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap()
    );
    assert_eq!(t.labels, Some(vec![0, 1, 0]));
    assert_eq!(t.class_names, vec!["a", "b"]);
}

#[test]
fn csv_delimiters_and_label_positions() {
    let semi = parse_table("x;y;cls\nb;1.5;2\na;3;4\n", LabelColumn::Index(0), true).unwrap();
    assert_eq!(semi.class_names, vec!["b", "a"]);
    assert_eq!(
        semi.feature_names,
        Some(vec!["y".to_string(), "cls".to_string()])
    );
    assert_eq!(semi.x.row(1), &[3.0, 4.0]);
    let tab = parse_table("1\t2\n3\t4\n", LabelColumn::None, false).unwrap();
    assert_eq!(tab.labels, None);
    assert_eq!(tab.x.shape(), (2, 2));
}

#[test]
fn csv_errors_name_row_and_column() {
    let err = parse_table("1,2,a\n3,NaN,b\n", LabelColumn::Last, false).unwrap_err();
    assert!(
        matches!(&err, CliError::Data(m) if m.contains("row 2, column 2")),
        "{err}"
    );
    let err = parse_table("h1,h2,l\n1,2,a\n3,x,b\n", LabelColumn::Last, true).unwrap_err();
    assert!(
        matches!(&err, CliError::Data(m) if m.contains("row 3, column 2") && m.contains("`x`")),
        "{err}"
    );
    let err = parse_table("1,2,a\n3,b\n", LabelColumn::Last, false).unwrap_err();
    assert!(
        matches!(&err, CliError::Data(m) if m.contains("row 2")),
        "{err}"
    );
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("one.csv");
    fs::write(&p, "1,2,a\n3,4,a\n").unwrap();
    assert!(matches!(
        load_csv(&p, LabelColumn::Last, false),
        Err(CliError::Data(_))
    ));
    assert!(parse_table("", LabelColumn::Last, false).is_err());
}

#[test]
fn iris_and_wine_load() {
    let iris = load_csv(&data_dir().join("iris.csv"), LabelColumn::Last, true).unwrap();
    assert_eq!(
        (
            iris.dataset.len(),
            iris.dataset.dim(),
            iris.dataset.num_classes()
        ),
        (150, 4, 3)
    );
    assert_eq!(iris.dataset.class_sizes(), vec![50, 50, 50]);
    let wine = load_csv(&data_dir().join("wine.csv"), LabelColumn::Last, true).unwrap();
    assert_eq!(
        (
            wine.dataset.len(),
            wine.dataset.dim(),
            wine.dataset.num_classes()
        ),
        (178, 13, 3)
    );
    assert_eq!(wine.dataset.class_sizes(), vec![59, 71, 48]);
}

fn round_trip(model: Reducer, probe: &Matrix) {
    let bytes = encode_model(&model);
    let back = decode_model(&bytes).unwrap();
    assert_eq!(back, model);
    let a = model.project(probe).unwrap();
    let b = back.project(probe).unwrap();
    assert!(a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .all(|(x, y)| x.to_bits() == y.to_bits()));
    assert_eq!(encode_model(&back), bytes);
}

#[test]
fn models_round_trip_bit_exactly() {
    let iris = load_csv(&data_dir().join("iris.csv"), LabelColumn::Last, true)
        .unwrap()
        .dataset;
    let probe = iris.x().clone();
    for (variant, origin, scaling) in [
        (Variant::Quad, Origin::ClassMean, Scaling::None),
        (Variant::Abs, Origin::GlobalMean, Scaling::MinMax),
        (Variant::Quad, Origin::GlobalMean, Scaling::ZScore),
    ] {
        let cfg = FitConfig {
            variant,
            origin,
            scaling,
            epsilon: 0.01,
            ..FitConfig::default()
        };
        round_trip(Reducer::Linear(fit_linear(&iris, &cfg).unwrap()), &probe);
        let small = iris
            .subset(&(0..150).step_by(3).collect::<Vec<_>>())
            .unwrap();
        round_trip(
            Reducer::Kernel(fit_kernel(&small, KernelSpec::Rbf { sigma: 0.7 }, &cfg).unwrap()),
            &probe,
        );
    }
    round_trip(
        Reducer::Baseline(pca_fit(&iris, 3, Scaling::MinMax).unwrap()),
        &probe,
    );
    round_trip(
        Reducer::Baseline(fld_fit(&iris, Scaling::None).unwrap()),
        &probe,
    );
    let small = iris
        .subset(&(0..150).step_by(5).collect::<Vec<_>>())
        .unwrap();
    round_trip(
        Reducer::Baseline(
            kpca_fit(&small, KernelSpec::Rbf { sigma: 1.0 }, 3, Scaling::None).unwrap(),
        ),
        &probe,
    );
    round_trip(
        Reducer::Baseline(
            kfld_fit(
                &small,
                KernelSpec::Polynomial {
                    degree: 2.0,
                    offset: 1.0,
                },
                Scaling::MinMax,
            )
            .unwrap(),
        ),
        &probe,
    );
}

#[test]
fn corrupt_model_files_are_rejected() {
    let data = Dataset::new(random_gaussian(6, 2, 0), vec![0, 0, 0, 1, 1, 1], 2).unwrap();
    let bytes = encode_model(&Reducer::Linear(
        fit_linear(&data, &FitConfig::default()).unwrap(),
    ));
    assert!(decode_model(&bytes[..bytes.len() - 1]).is_err());
    let mut extra = bytes.clone();
    extra.push(0);
    assert!(decode_model(&extra).is_err());
    let bumped =
        String::from_utf8_lossy(&bytes).replacen("CATSPACE-MODEL 1", "CATSPACE-MODEL 9", 1);
    assert!(decode_model(bumped.as_bytes()).is_err());
    assert!(decode_model(b"hello\n").is_err());
}

#[test]
fn svg_single_point_at_centre() {
    let y = Matrix::zeros(1, 2);
    let svg = scatter_svg(&y, &[0], (0, 1), &[]).unwrap();
    let vp = Viewport::fit(&[0.0], &[0.0]);
    assert_eq!((vp.px(0.0), vp.py(0.0)), (WIDTH / 2.0, HEIGHT / 2.0));
    assert!(svg.contains(r#"<circle cx="240.00" cy="240.00""#), "{svg}");
    assert_eq!(svg.matches("<circle").count(), 1);
}

#[test]
fn svg_viewport_margin_and_errors() {
    let vp = Viewport::fit(&[1.0, 3.0], &[-2.0, -1.0]);
    for (got, want) in [
        (vp.x_min, -0.15),
        (vp.x_max, 3.15),
        (vp.y_min, -2.1),
        (vp.y_max, 0.1),
    ] {
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
    let y = Matrix::from_rows(&[[1.0, -2.0, 0.0], [3.0, -1.0, 0.5]]).unwrap();
    let names = vec!["a<1".to_string(), "b".to_string(), "c".to_string()];
    let svg = scatter_svg(&y, &[0, 2], (0, 1), &names).unwrap();
    assert!(svg.contains("a&lt;1") && svg.contains("#2ca02c"));
    assert_eq!(svg, scatter_svg(&y, &[0, 2], (0, 1), &names).unwrap());
    assert!(scatter_svg(&Matrix::zeros(0, 2), &[], (0, 1), &[]).is_err());
    assert!(scatter_svg(&y, &[0, 2], (0, 3), &[]).is_err());
    assert!(scatter_svg(&y, &[0], (0, 1), &[]).is_err());
}

#[test]
fn fit_then_project_reproduces_objective() {
    let dir = tempfile::tempdir().unwrap();
    let iris = data_dir().join("iris.csv");
    for extra in [
        &["--method", "cqs"][..],
        &[
            "--method",
            "kcas",
            "--sigma",
            "0.5",
            "--scaling",
            "minmax",
            "--origin",
            "global",
        ][..],
    ] {
        let out = dir.path().join("model");
        let mut args = vec![
            "fit",
            iris.to_str().unwrap(),
            "--header",
            "--out",
            out.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        let (code, fit_out, err) = catspace(&args);
        assert_eq!(code, 0, "{err}");
        let objective = fit_out
            .lines()
            .find_map(|l| l.strip_prefix("objective\t"))
            .unwrap()
            .to_string();
        let proj = dir.path().join("proj");
        let (code, proj_out, err) = catspace(&[
            "project",
            iris.to_str().unwrap(),
            "--header",
            "--model",
            out.join("model.bin").to_str().unwrap(),
            "--out",
            proj.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
        let again = proj_out
            .lines()
            .find_map(|l| l.strip_prefix("objective\t"))
            .unwrap();
        let (a, b): (f64, f64) = (objective.parse().unwrap(), again.parse().unwrap());
        assert!((a - b).abs() <= 1e-9 * a.abs(), "{a} vs {b}");
        let tsv = read_table(&proj.join("projection.tsv"), LabelColumn::Last, true).unwrap();
        assert_eq!(tsv.x.shape(), (150, 3));
        assert!(proj.join("manifest.json").exists());
    }
}

#[test]
fn certificate_on_certified_fit() {
    let dir = tempfile::tempdir().unwrap();
    let csv = cross_csv(dir.path());
    let out = dir.path().join("m");
    let (code, _, err) = catspace(&["fit", csv.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let model = out.join("model.bin");
    let (code, text, err) = catspace(&[
        "certificate",
        csv.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(text.contains("is_stationary=true"), "{text}");
    assert!(text.contains("is_global_certified=true"), "{text}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let iris = data_dir().join("iris.csv");
    let out = dir.path().join("o");
    let o = out.to_str().unwrap();
    assert_eq!(catspace(&["fit"]).0, 2);
    assert_eq!(
        catspace(&[
            "fit",
            iris.to_str().unwrap(),
            "--header",
            "--method",
            "nope",
            "--out",
            o
        ])
        .0,
        2
    );
    assert_eq!(
        catspace(&[
            "fit",
            iris.to_str().unwrap(),
            "--header",
            "--method",
            "kcqs",
            "--out",
            o
        ])
        .0,
        2
    );
    assert_eq!(catspace(&["fit", "/nonexistent.csv", "--out", o]).0, 3);
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "1,2,a\n3,nan,b\n").unwrap();
    let (code, _, err) = catspace(&["fit", bad.to_str().unwrap(), "--out", o]);
    assert_eq!(code, 3);
    assert!(err.contains("row 2, column 2"), "{err}");
    let (code, _, _) = catspace(&[
        "fit",
        iris.to_str().unwrap(),
        "--header",
        "--max-iter",
        "1",
        "--out",
        o,
    ]);
    assert_eq!(code, 4);
    assert!(out.join("model.bin").exists());
    assert_eq!(catspace(&["--help"]).0, 0);
}

#[test]
fn benchmark_writes_table_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let iris = data_dir().join("iris.csv");
    let out = dir.path().join("bench");
    let (code, text, err) = catspace(&[
        "benchmark",
        iris.to_str().unwrap(),
        "--header",
        "--method",
        "cqs",
        "--method",
        "pca",
        "--repeats",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "dataset\tmethod\tmean_acc\tsd\trepeats");
    assert!(lines[1].starts_with("iris\tcqs\t") && lines[1].ends_with("\t3"));
    assert!(lines[2].starts_with("iris\tpca\t"));
    assert_eq!(fs::read_to_string(out.join("table.tsv")).unwrap(), text);
    let man = catspace_cli::manifest::RunManifest::read(&out.join("manifest.json")).unwrap();
    assert_eq!(man.command, "benchmark");
    assert_eq!(man.args[0], "benchmark");
}
