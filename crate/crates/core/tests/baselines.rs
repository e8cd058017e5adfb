mod common;

use catspace::baselines::*;
use catspace::kernel::KernelSpec;
use catspace::linalg::{random_gaussian, Matrix};
use catspace::{Dataset, Scaling};
use common::{blobs, random_dataset, solve};

fn abs_corr(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    (sab / (saa * sbb).sqrt()).abs()
}

fn same_up_to_sign(a: &Matrix, b: &Matrix, tol: f64) -> bool {
    (0..a.cols()).all(|k| {
        let (x, y) = (a.column(k), b.column(k));
        let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        x.iter().zip(&y).all(|(p, q)| (p - q).abs() <= tol * scale)
            || x.iter().zip(&y).all(|(p, q)| (p + q).abs() <= tol * scale)
    })
}

#[test]
fn pca_flags_ties_and_orders_variance() {
    // Points on the axes of a square: isotropic covariance.
    let x = Matrix::from_rows(&[[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]).unwrap();
    let data = Dataset::new(x, vec![0, 0, 1, 1], 2).unwrap();
    let m = pca_fit(&data, 2, Scaling::None).unwrap();
    assert_eq!(m.degenerate, vec![true, true]);

    let noise = random_gaussian(200, 3, 5);
    let x = Matrix::from_fn(200, 3, |i, j| noise[(i, j)] * [5.0, 1.0, 0.2][j]);
    let labels = (0..200).map(|i| i % 2).collect();
    let data = Dataset::new(x, labels, 2).unwrap();
    let m = pca_fit(&data, 2, Scaling::None).unwrap();
    assert!(m.eigenvalues[0] > m.eigenvalues[1]);
    assert!(m.projection[(0, 0)].abs() > 0.99);
    assert!(m.projection[(1, 1)].abs() > 0.99);
    assert_eq!(m.degenerate, vec![false, false]);
}

#[test]
fn full_rank_pca_is_lossless() {
    let data = random_dataset(&[6, 7], 4, 2);
    let m = pca_fit(&data, 4, Scaling::None).unwrap();
    let y = baseline_project(&m, data.x()).unwrap();
    let back = y.matmul_t(&m.projection);
    let mean = data.x().column_means();
    let rec = Matrix::from_fn(back.rows(), 4, |i, j| back[(i, j)] + mean[j]);
    assert!(rec.sub(data.x()).max_abs() < 1e-10);
    assert!(pca_fit(&data, 5, Scaling::None).is_err());
}

#[test]
fn two_class_fld_matches_closed_form() {
    let data = random_dataset(&[15, 20], 3, 9);
    let m = fld_fit(&data, Scaling::None).unwrap();
    assert_eq!(m.output_dim(), 1);
    let means = data.class_means();
    let mut sw = Matrix::zeros(3, 3);
    for r in data.class_scatters() {
        sw = sw.add(&r);
    }
    let diff: Vec<f64> = (0..3).map(|j| means[(1, j)] - means[(0, j)]).collect();
    let v = solve(&sw, &diff);
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let p = m.projection.column(0);
    let np = p.iter().map(|a| a * a).sum::<f64>().sqrt();
    let cos: f64 = v.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>() / (nv * np);
    assert!((cos.abs() - 1.0).abs() < 1e-8, "cos {cos}");
}

#[test]
fn collinear_means_flag_second_direction() {
    let noise = random_gaussian(30, 3, 4);
    let labels: Vec<usize> = (0..30).map(|i| i / 10).collect();
    // Exactly collinear class means after centring each class's noise.
    let mut x = Matrix::from_fn(30, 3, |i, j| noise[(i, j)]);
    for c in 0..3 {
        let rows: Vec<usize> = (c * 10..c * 10 + 10).collect();
        let mu = x.select_rows(&rows).column_means();
        for &r in &rows {
            for j in 0..3 {
                x[(r, j)] += -mu[j] + if j == 0 { 3.0 * c as f64 } else { 0.0 };
            }
        }
    }
    let data = Dataset::new(x, labels, 3).unwrap();
    let m = fld_fit(&data, Scaling::None).unwrap();
    assert_eq!(m.degenerate, vec![false, true]);
}

#[test]
fn fld_invariant_to_label_permutation_and_affine_maps() {
    let data = random_dataset(&[10, 12, 11], 4, 21);
    let base = fld_fit(&data, Scaling::None).unwrap();
    let y0 = baseline_project(&base, data.x()).unwrap();

    let perm = [2usize, 0, 1];
    let relabelled = Dataset::new(
        data.x().clone(),
        data.labels().iter().map(|&l| perm[l]).collect(),
        3,
    )
    .unwrap();
    let m = fld_fit(&relabelled, Scaling::None).unwrap();
    for (a, b) in base.eigenvalues.iter().zip(&m.eigenvalues) {
        assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0));
    }
    assert!(same_up_to_sign(
        &y0,
        &baseline_project(&m, data.x()).unwrap(),
        1e-6
    ));

    let a = random_gaussian(4, 4, 77).add(&Matrix::identity(4).scale(3.0));
    let shift = [1.0, -2.0, 0.5, 4.0];
    let moved = data.x().matmul(&a);
    let moved = Matrix::from_fn(moved.rows(), 4, |i, j| moved[(i, j)] + shift[j]);
    let m = fld_fit(&data.with_features(moved.clone()).unwrap(), Scaling::None).unwrap();
    let y1 = baseline_project(&m, &moved).unwrap();
    for k in 0..2 {
        assert!(abs_corr(&y0.column(k), &y1.column(k)) > 1.0 - 1e-6);
    }
}

#[test]
fn linear_kpca_matches_pca() {
    let data = random_dataset(&[8, 9, 10], 5, 3);
    let pca = pca_fit(&data, 3, Scaling::MinMax).unwrap();
    let kpca = kpca_fit(&data, KernelSpec::Linear, 3, Scaling::MinMax).unwrap();
    let xnew = random_gaussian(6, 5, 8);
    assert!(same_up_to_sign(
        &baseline_project(&pca, &xnew).unwrap(),
        &baseline_project(&kpca, &xnew).unwrap(),
        1e-8
    ));
    for (a, b) in pca.eigenvalues.iter().zip(&kpca.eigenvalues) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn linear_kfld_matches_fld() {
    let data = blobs(15, 3, 3, 3.0, 6);
    let fld = fld_fit(&data, Scaling::None).unwrap();
    let kfld = kfld_fit(&data, KernelSpec::Linear, Scaling::None).unwrap();
    assert_eq!(kfld.output_dim(), 2);
    let xnew = random_gaussian(20, 3, 1);
    let a = baseline_project(&fld, &xnew).unwrap();
    let b = baseline_project(&kfld, &xnew).unwrap();
    // Same discriminant subspace: each kfld axis lies in the span of the fld axes.
    for k in 0..2 {
        let col = b.column(k);
        let coef = solve(&a.t_matmul(&a), &a.t_matvec(&col));
        let fit = a.matvec(&coef);
        let res: f64 = fit
            .iter()
            .zip(&col)
            .map(|(p, q)| (p - q).powi(2))
            .sum::<f64>()
            .sqrt();
        let nrm: f64 = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(res <= 1e-4 * nrm, "axis {k}: residual {res} of {nrm}");
    }
    assert!(kfld.singular_scatter);
}
