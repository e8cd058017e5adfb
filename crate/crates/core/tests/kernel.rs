mod common;

use catspace::fit::{fit_linear, project, FitConfig, Origin, Variant};
use catspace::kernel::*;
use catspace::linalg::{random_gaussian, Matrix};
use catspace::{certificate::certificate_check, Dataset, Error};
use common::{blobs, pairwise_minimise, random_dataset};

#[test]
fn gram_examples() {
    let x = random_gaussian(7, 3, 1);
    let g = gram(&x, KernelSpec::Rbf { sigma: 0.7 }).unwrap().g;
    assert!((0..7).all(|i| g[(i, i)] == 1.0));
    assert_eq!(g.asymmetry(), 0.0);
    let g = gram(&x, KernelSpec::Linear).unwrap().g;
    assert_eq!(g, x.matmul_t(&x));
    let g = gram(&x, KernelSpec::Rbf { sigma: 1e5 }).unwrap().g;
    assert!(g.map(|v| v - 1.0).max_abs() <= 1e-6);
    assert!(gram(&x, KernelSpec::Rbf { sigma: 0.0 }).is_err());
    let g = gram(
        &x,
        KernelSpec::Polynomial {
            degree: 2.0,
            offset: 1.0,
        },
    )
    .unwrap()
    .g;
    let d = catspace::linalg::dot(x.row(0), x.row(1));
    assert!((g[(0, 1)] - (d + 1.0).powi(2)).abs() < 1e-12);
}

fn matched(
    data: &Dataset,
    variant: Variant,
    origin: Origin,
    seed: u64,
) -> (f64, f64, Matrix, Matrix) {
    let cfg = FitConfig {
        variant,
        origin,
        seed,
        ..FitConfig::default()
    };
    let lin = fit_linear(data, &cfg).unwrap();
    let ker = fit_kernel(data, KernelSpec::Linear, &cfg).unwrap();
    (
        lin.objective,
        ker.objective,
        project(&lin, data.x()).unwrap(),
        kernel_project(&ker, data.x()).unwrap(),
    )
}

#[test]
fn linear_kernel_reproduces_linear_fit() {
    for seed in 0..10u64 {
        let data = random_dataset(&[8, 9, 7], 5, 200 + seed);
        for origin in [Origin::ClassMean, Origin::GlobalMean] {
            let (lo, ko, ly, ky) = matched(&data, Variant::Quad, origin, seed);
            assert!((lo - ko).abs() <= 1e-6, "seed {seed}: {lo} vs {ko}");
            // Same axes up to sign.
            for k in 0..3 {
                let a = ly.column(k);
                let b = ky.column(k);
                let same = a
                    .iter()
                    .zip(&b)
                    .all(|(x, y)| (x - y).abs() <= 1e-5 * (1.0 + x.abs()));
                let flip = a
                    .iter()
                    .zip(&b)
                    .all(|(x, y)| (x + y).abs() <= 1e-5 * (1.0 + x.abs()));
                assert!(same || flip, "seed {seed} axis {k}");
            }
        }
    }
}

#[test]
fn orthogonal_one_hot_classes() {
    let x = Matrix::identity(3);
    let data = Dataset::new(
        Matrix::from_fn(6, 3, |i, j| {
            x[(i / 2, j)] * if i % 2 == 0 { 1.0 } else { 2.0 }
        }),
        vec![0, 0, 1, 1, 2, 2],
        3,
    )
    .unwrap();
    let m = fit_kernel(&data, KernelSpec::Linear, &FitConfig::default()).unwrap();
    let g = gram(&m.train_x, KernelSpec::Linear).unwrap().g;
    let agat = m.a.matmul(&g).matmul_t(&m.a);
    assert!(agat.sub(&Matrix::identity(3)).max_abs() <= 1e-10);
    let y = kernel_project(&m, &Matrix::identity(3)).unwrap();
    for k in 0..3 {
        assert!((y[(k, k)].abs() - 1.0).abs() < 1e-8, "{y:?}");
    }
}

#[test]
fn kernel_fit_orthonormality_and_descent() {
    let data = blobs(12, 3, 3, 2.5, 4);
    for variant in [Variant::Quad, Variant::Abs] {
        let cfg = FitConfig {
            variant,
            origin: Origin::GlobalMean,
            ..FitConfig::default()
        };
        let m = fit_kernel(&data, KernelSpec::Rbf { sigma: 1.0 }, &cfg).unwrap();
        let g = gram(&m.train_x, m.spec).unwrap().g;
        let agat = m.a.matmul(&g).matmul_t(&m.a);
        assert!(agat.sub(&Matrix::identity(3)).max_abs() <= 1e-6);
        if variant == Variant::Quad {
            assert!(m.objective_trace.windows(2).all(|w| w[1] <= w[0] + 1e-10));
        }
    }
}

#[test]
fn projection_consistency() {
    let data = blobs(10, 2, 2, 3.0, 8);
    let cfg = FitConfig::default();
    let m = fit_kernel(&data, KernelSpec::Rbf { sigma: 0.5 }, &cfg).unwrap();
    let g = gram(&m.train_x, m.spec).unwrap().g;
    let train_scores = m.a.matmul(&g).transpose();
    let y = kernel_project(&m, data.x()).unwrap();
    assert!(y.sub(&train_scores).max_abs() <= 1e-10);

    let far = Matrix::from_rows(&[[1e3, -1e3]]).unwrap();
    assert!(kernel_project(&m, &far).unwrap().max_abs() <= 1e-12);

    let lm = fit_kernel(&data, KernelSpec::Linear, &cfg).unwrap();
    let xnew = random_gaussian(4, 2, 1);
    let direct = xnew.matmul_t(&lm.train_x).matmul_t(&lm.a);
    assert!(kernel_project(&lm, &xnew).unwrap().sub(&direct).max_abs() <= 1e-10);
    assert!(matches!(
        kernel_project(&lm, &Matrix::zeros(1, 3)),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn kernel_z_updates() {
    let data = random_dataset(&[4, 5], 3, 6);
    let m = fit_kernel(&data, KernelSpec::Rbf { sigma: 1.0 }, &FitConfig::default()).unwrap();
    let g = gram(&m.train_x, m.spec).unwrap().g;
    let z = update_z_kernel_quad(&m.a, &data, &g).unwrap();
    let s = m.a.matmul(&g);
    for (k, idx) in data.class_index().iter().enumerate() {
        let sk: Vec<f64> = idx.iter().map(|&i| s[(k, i)]).collect();
        let oracle = pairwise_minimise(&sk, -1e6, 1e6, |z, s| -z * s + 0.5 * z * z);
        for j in 0..sk.len() {
            assert!((z.values[k][j] - oracle[j]).abs() < 1e-6);
        }
    }
    let eps = 0.05;
    let za = update_z_kernel_abs(&m.a, &data, &g, eps).unwrap();
    for (k, idx) in data.class_index().iter().enumerate() {
        let sk: Vec<f64> = idx.iter().map(|&i| s[(k, i)]).collect();
        let oracle = pairwise_minimise(&sk, -1.0, 1.0, |z, s| {
            -z * s - eps * (1.0 - z * z).max(0.0).sqrt()
        });
        for j in 0..sk.len() {
            assert!((za.values[k][j] - oracle[j]).abs() < 1e-5);
        }
    }
    // Equal scores within a class give z = 0; a symmetric pair gives ±1.

    let two = Matrix::from_rows(&[[0.5, 0.5, -1.0, 1.0], [0.0, 0.0, 0.0, 0.0]]).unwrap();
    let d2 = Dataset::new(Matrix::zeros(4, 1), vec![0, 0, 1, 1], 2).unwrap();
    let z = update_z_kernel_quad(&two, &d2, &Matrix::identity(4)).unwrap();
    assert_eq!(z.values[0], vec![0.0, 0.0]);

    let a = Matrix::from_rows(&[[0.0, 0.0, 0.0, 0.0], [0.0, 0.0, -1.0, 1.0]]).unwrap();
    let z = update_z_kernel_quad(&a, &d2, &Matrix::identity(4)).unwrap();
    assert_eq!(z.values[1], vec![-1.0, 1.0]);
}

#[test]
fn linear_kernel_certificate_matches_linear() {
    let data = blobs(20, 4, 3, 4.0, 3);
    let cfg = FitConfig::default();
    let lin = fit_linear(&data, &cfg).unwrap();
    let ker = fit_kernel(&data, KernelSpec::Linear, &cfg).unwrap();
    let a = certificate_check(&lin.w, &data, None).unwrap();
    let b = kernel_certificate(&ker, &data, None).unwrap();
    assert_eq!(a.is_stationary, b.is_stationary);
    assert_eq!(a.is_second_order_necessary, b.is_second_order_necessary);
    assert_eq!(a.is_global_certified, b.is_global_certified);
    assert!((a.full_max_eig - b.full_max_eig).abs() <= 1e-6 * (1.0 + a.full_max_eig.abs()));
}

#[test]
fn rbf_certificate_is_stationary() {
    let data = blobs(10, 2, 3, 4.0, 12);
    let m = fit_kernel(&data, KernelSpec::Rbf { sigma: 1.0 }, &FitConfig::default()).unwrap();
    assert!(m.converged);
    let rep = kernel_certificate(&m, &data, None).unwrap();
    assert!(rep.first_order_residual <= 1e-6, "{rep:?}");
    let abs = fit_kernel(
        &data,
        KernelSpec::Rbf { sigma: 1.0 },
        &FitConfig {
            variant: Variant::Abs,
            ..FitConfig::default()
        },
    )
    .unwrap();
    assert!(kernel_certificate(&abs, &data, None).is_err());
}

#[test]
fn duplicated_points_use_reduced_rank() {
    let base = blobs(6, 3, 2, 3.0, 2);
    let mut rows: Vec<Vec<f64>> = (0..base.len()).map(|i| base.x().row(i).to_vec()).collect();
    let mut labels = base.labels().to_vec();
    rows.push(rows[0].clone());
    labels.push(labels[0]);
    let data = Dataset::new(Matrix::from_rows(&rows).unwrap(), labels, 2).unwrap();
    let m = fit_kernel(&data, KernelSpec::Linear, &FitConfig::default()).unwrap();
    assert_eq!(m.retained_rank, 3);
    let g = gram(&m.train_x, m.spec).unwrap().g;
    assert!(
        m.a.matmul(&g)
            .matmul_t(&m.a)
            .sub(&Matrix::identity(2))
            .max_abs()
            <= 1e-6
    );
    let m = fit_kernel(&data, KernelSpec::Rbf { sigma: 1.0 }, &FitConfig::default()).unwrap();
    assert!(m.retained_rank < data.len());
    assert!(m.converged);
}

#[test]
fn degenerate_gram_is_rejected() {
    let x = Matrix::from_rows(&[[1.0], [2.0], [3.0], [4.0], [5.0], [6.0]]).unwrap();
    let data = Dataset::new(x, vec![0, 0, 1, 1, 2, 2], 3).unwrap();
    assert!(matches!(
        fit_kernel(&data, KernelSpec::Linear, &FitConfig::default()),
        Err(Error::DegenerateGram {
            retained: 1,
            required: 3
        })
    ));
}
