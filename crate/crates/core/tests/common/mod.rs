#![allow(dead_code)]

use olskit::linalg::{Matrix, Tolerance, Vector};
use olskit::model::{FiniteModel, ObservationMap};
use olskit::rng::{seeded, standard_normal_matrix, standard_normal_vector};

pub fn tol() -> Tolerance {
    Tolerance::default()
}

/// `A Aᵀ / r` for a Gaussian `n x r` matrix `A`.
pub fn wishart(seed: u64, n: usize, r: usize) -> Matrix {
    let mut rng = seeded(seed, 100);
    let a = standard_normal_matrix(&mut rng, n, r);
    let k = &a * a.transpose() / r.max(1) as f64;
    (&k + k.transpose()) * 0.5
}

pub fn gaussian(seed: u64, stream: u64, rows: usize, cols: usize) -> Matrix {
    standard_normal_matrix(&mut seeded(seed, stream), rows, cols)
}

pub fn gaussian_vec(seed: u64, stream: u64, n: usize) -> Vector {
    standard_normal_vector(&mut seeded(seed, stream), n)
}

/// Full-rank model with Wishart covariance and Gaussian mean.
pub fn random_model(seed: u64, n: usize) -> FiniteModel {
    FiniteModel::new(gaussian_vec(seed, 101, n), wishart(seed, n, n + 2), "random", &tol()).unwrap()
}

pub fn random_obs(seed: u64, p: usize, n: usize) -> ObservationMap {
    ObservationMap::new(gaussian(seed, 102, p, n)).unwrap()
}

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Whether the sample mean of `xs` is within 4 standard errors of `target`.
pub fn within_4se(xs: &[f64], target: f64) -> bool {
    let (mean, se) = mean_se(xs);
    (mean - target).abs() <= 4.0 * se
}

/// Solve the least `K⁻¹`-norm interpolation `min (v-m)ᵀ K⁻¹ (v-m)` subject to
/// `G v = y` through its KKT system.
pub fn kkt_interpolate(k: &Matrix, g: &Matrix, m: &Vector, y: &Vector) -> Vector {
    let n = k.nrows();
    let p = g.nrows();
    let kinv = k.clone().try_inverse().expect("full-rank covariance");
    let mut a = Matrix::zeros(n + p, n + p);
    a.view_mut((0, 0), (n, n)).copy_from(&kinv);
    a.view_mut((0, n), (n, p)).copy_from(&g.transpose());
    a.view_mut((n, 0), (p, n)).copy_from(g);
    let mut rhs = Vector::zeros(n + p);
    rhs.rows_mut(n, p).copy_from(&(y - g * m));
    let sol = a.lu().solve(&rhs).expect("nonsingular KKT system");
    m + sol.rows(0, n)
}

/// Unit vectors at `count` evenly spaced angles in the plane.
pub fn circle_directions(count: usize) -> Vec<Vector> {
    (0..count)
        .map(|k| {
            let t = std::f64::consts::PI * k as f64 / count as f64;
            Vector::from_column_slice(&[t.cos(), t.sin()])
        })
        .collect()
}
