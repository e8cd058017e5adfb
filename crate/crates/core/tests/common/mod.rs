#![allow(dead_code)]

use catspace::linalg::{random_gaussian, Matrix};
use catspace::Dataset;

/// `k` Gaussian classes of `n` points each in `d` dimensions. Class `c` is
/// centred at `sep · e_{c mod d}` (shifted for `c ≥ d`).
pub fn blobs(n: usize, d: usize, k: usize, sep: f64, seed: u64) -> Dataset {
    let noise = random_gaussian(n * k, d, seed);
    let mut labels = Vec::with_capacity(n * k);
    let x = Matrix::from_fn(n * k, d, |i, j| {
        let c = i / n;
        let centre = if j == c % d {
            sep * (1.0 + (c / d) as f64)
        } else {
            0.0
        };
        centre + noise[(i, j)]
    });
    for i in 0..n * k {
        labels.push(i / n);
    }
    Dataset::new(x, labels, k).unwrap()
}

/// Random dataset with class sizes `sizes`, Gaussian features with a random
/// per-class shift.
pub fn random_dataset(sizes: &[usize], d: usize, seed: u64) -> Dataset {
    let n: usize = sizes.iter().sum();
    let noise = random_gaussian(n, d, seed);
    let shifts = random_gaussian(sizes.len(), d, seed ^ 0xABCD);
    let mut labels = Vec::with_capacity(n);
    for (k, &s) in sizes.iter().enumerate() {
        labels.extend(std::iter::repeat(k).take(s));
    }
    let x = Matrix::from_fn(n, d, |i, j| noise[(i, j)] + 2.0 * shifts[(labels[i], j)]);
    Dataset::new(x, labels, sizes.len()).unwrap()
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = a.rows();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut r = a.row(i).to_vec();
            r.push(b[i]);
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .unwrap();
        m.swap(c, p);
        for r in (c + 1)..n {
            let f = m[r][c] / m[c][c];
            for cc in c..=n {
                m[r][cc] -= f * m[c][cc];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = ((r + 1)..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    x
}

/// Minimises a separable convex `Σ φ(z_i, s_i)` subject to `Σ z_i = 0` and
/// `lo ≤ z_i ≤ hi` by pairwise transfers: for each pair the transfer `t`
/// from `z_j` to `z_i` is found by ternary search. Brute force, but
/// independent of any closed form.
pub fn pairwise_minimise(s: &[f64], lo: f64, hi: f64, phi: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let n = s.len();
    let mut z = vec![0.0; n];
    for _sweep in 0..400 {
        let mut moved = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let tmin = (lo - z[i]).max(z[j] - hi);
                let tmax = (hi - z[i]).min(z[j] - lo);
                if tmax <= tmin {
                    continue;
                }
                let f = |t: f64| phi(z[i] + t, s[i]) + phi(z[j] - t, s[j]);
                let (mut a, mut b) = (tmin, tmax);
                for _ in 0..200 {
                    let m1 = a + (b - a) / 3.0;
                    let m2 = b - (b - a) / 3.0;
                    if f(m1) <= f(m2) {
                        b = m2;
                    } else {
                        a = m1;
                    }
                }
                let t = 0.5 * (a + b);
                if f(t) < f(0.0) {
                    z[i] += t;
                    z[j] -= t;
                    moved = moved.max(t.abs());
                }
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// Error-free product and sum accumulation (double-double).
pub fn dd_dot(a: &[f64], b: &[f64]) -> f64 {
    let (mut hi, mut lo) = (0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let p = x * y;
        let pe = x.mul_add(y, -p);
        let s = hi + p;
        let bb = s - hi;
        let se = (hi - (s - bb)) + (p - bb);
        hi = s;
        lo += se + pe;
    }
    hi + lo
}
