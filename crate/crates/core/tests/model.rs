mod common;

use olskit::linalg::{self, Matrix, Vector};
use olskit::model::{
    self, contravariance_check, delta_norm, delta_ratio, gmt_compare, ols_build, ols_estimate, operator_norm,
    paley_wiener, pushforward, random_right_inverse, sample, AffineEstimator, FiniteModel, ObservationMap,
};

use common::{
    circle_directions, gaussian, gaussian_vec, kkt_interpolate, random_model, random_obs, tol, wishart, within_4se,
};

#[test]
fn ols_matches_least_norm_interpolation() {
    for seed in 0..30u64 {
        let n = 3 + seed as usize % 10;
        let p = 1 + seed as usize % n.min(6);
        let model = random_model(seed, n);
        let obs = random_obs(seed, p, n);
        let est = ols_build(&model, &obs, &tol()).unwrap();
        let y = gaussian_vec(seed, 5, p);
        let ours = ols_estimate(&est, &y).unwrap();
        let oracle = kkt_interpolate(&model.cov, &obs.g, &model.mean, &y);
        assert!((&ours - &oracle).norm() <= 1e-8 * (1.0 + oracle.norm()), "seed {seed}");
        assert!((&obs.g * &ours - &y).norm() <= 1e-8 * (1.0 + y.norm()));
    }
}

#[test]
fn two_dim_hand_example() {
    let model = FiniteModel::centered(Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]), "2d", &tol()).unwrap();
    let obs = ObservationMap::new(Matrix::from_row_slice(1, 2, &[1.0, 0.0])).unwrap();
    let y = Vector::from_element(1, 2.0);
    let est = ols_build(&model, &obs, &tol()).unwrap();
    let oracle = kkt_interpolate(&model.cov, &obs.g, &model.mean, &y);
    assert!((ols_estimate(&est, &y).unwrap() - &oracle).norm() < 1e-14);
    assert!((oracle - Vector::from_column_slice(&[2.0, 1.0])).norm() < 1e-14);
}

#[test]
fn restricted_inverse_on_cameron_martin_image() {
    for seed in 0..10u64 {
        let model = random_model(seed, 7);
        let obs = random_obs(seed, 4, 7);
        let est = ols_build(&model, &obs, &tol()).unwrap();
        let s = &obs.g * &model.cov * obs.g.transpose();
        for j in 0..20u64 {
            let e = gaussian_vec(seed, 1000 + j, 4);
            let y = &s * &e + obs.apply(&model.mean);
            let expect = &model.mean + &model.cov * obs.g.transpose() * &e;
            assert!((ols_estimate(&est, &y).unwrap() - &expect).norm() <= 1e-8 * (1.0 + expect.norm()));
        }
    }
}

#[test]
fn pushforward_moments_monte_carlo() {
    let model = random_model(4, 5);
    let obs = random_obs(4, 2, 5);
    let pushed = pushforward(&model, &obs).unwrap();
    let draws = sample(&model, 8, 100_000, &tol()).unwrap();
    let ys: Vec<Vector> = draws.iter().map(|v| obs.apply(v)).collect();
    for a in 0..2 {
        let xs: Vec<f64> = ys.iter().map(|y| y[a]).collect();
        assert!(within_4se(&xs, pushed.mean[a]));
        for b in a..2 {
            let prods: Vec<f64> = ys
                .iter()
                .map(|y| (y[a] - pushed.mean[a]) * (y[b] - pushed.mean[b]))
                .collect();
            assert!(within_4se(&prods, pushed.cov[(a, b)]), "cov ({a},{b})");
        }
    }
}

#[test]
fn sample_mean_clt_and_support() {
    let k = wishart(6, 6, 3);
    let mean = gaussian_vec(6, 1, 6);
    let model = FiniteModel::new(mean.clone(), k.clone(), "rank 3", &tol()).unwrap();
    let n = 100_000;
    let draws = sample(&model, 12, n, &tol()).unwrap();
    let p = linalg::range_projector(&k, &tol()).unwrap();
    let i = Matrix::identity(6, 6);
    for v in &draws {
        assert!(((&i - &p) * (v - &mean)).norm() <= 1e-10);
    }
    for c in 0..6 {
        let avg = draws.iter().map(|v| v[c]).sum::<f64>() / n as f64;
        assert!((avg - mean[c]).abs() <= 4.0 * (k[(c, c)] / n as f64).sqrt());
    }
}

#[test]
fn paley_wiener_isometry_monte_carlo() {
    let k = wishart(9, 5, 3);
    let model = FiniteModel::new(gaussian_vec(9, 1, 5), k.clone(), "rank 3", &tol()).unwrap();
    let u = &k * gaussian_vec(9, 2, 5);
    let pw = model::PaleyWiener::new(&model, &u, &tol()).unwrap();
    let norm2 = u.dot(&(linalg::pinv(&k, &tol()).unwrap() * &u));
    let draws = sample(&model, 3, 100_000, &tol()).unwrap();
    let squares: Vec<f64> = draws.iter().map(|v| pw.apply(v).powi(2)).collect();
    assert!(within_4se(&squares, norm2));
    assert_eq!(paley_wiener(&model, &u, &model.mean, &tol()).unwrap(), 0.0);
}

#[test]
fn ols_projector_identities_and_oblique_contrast() {
    for seed in 0..10u64 {
        let model = random_model(seed, 6);
        let obs = random_obs(seed, 3, 6);
        let est = ols_build(&model, &obs, &tol()).unwrap();
        let (l, r, k) = (&est.lifted, &est.residual, &model.cov);
        let small = |m: Matrix| m.norm() <= 1e-10 * (1.0 + k.norm());
        assert!(small(l * l - l) && small(r * r - r) && small(l * r));
        assert!(small(l * k * r.transpose()));
        assert!(small(l * k * l.transpose() - l * k) && small(l * k - k * l.transpose()));
        assert!(small(r * k * r.transpose() - r * k) && small(r * k - k * r.transpose()));
        assert!(small(&obs.g * &est.gain - Matrix::identity(3, 3)));

        let oblique = random_right_inverse(&est, seed).unwrap();
        let lo = &oblique * &obs.g;
        let ro = Matrix::identity(6, 6) - &lo;
        assert!(small(&lo * &lo - &lo) && small(&ro * &ro - &ro));
        assert!((&lo * k * ro.transpose()).norm() > 1e-6);
    }
}

#[test]
fn contravariance_random_chains() {
    for seed in 0..20u64 {
        let model = random_model(seed, 8);
        let first = ObservationMap::new(gaussian(seed, 20, 5, 8)).unwrap();
        let second = ObservationMap::new(gaussian(seed, 21, 3, 5)).unwrap();
        assert!(contravariance_check(&model, &first, &second, &tol()).unwrap() <= 1e-8);
    }
}

#[test]
fn biased_estimator_still_dominated_in_mse() {
    let model = random_model(2, 5);
    let obs = random_obs(2, 2, 5);
    let f = gaussian_vec(2, 3, 5);
    let est = ols_build(&model, &obs, &tol()).unwrap();
    let mut alternatives = Vec::new();
    for j in 0..10u64 {
        let mut alt = AffineEstimator::centered(&model, &obs, random_right_inverse(&est, j).unwrap()).unwrap();
        alt.offset += gaussian_vec(2, 40 + j, 5);
        alternatives.push(alt);
    }
    let report = gmt_compare(&model, &obs, &f, &alternatives, &tol()).unwrap();
    assert!(report.entries.iter().all(|e| e.bias.abs() > 1e-6));
    assert!(report.mse_all_hold);
    assert!(report.max_identity_residual <= 1e-10);
}

#[test]
fn operator_norm_matches_sampled_supremum() {
    for seed in 0..5u64 {
        let model = random_model(seed, 6);
        let obs = random_obs(seed, 2, 6);
        let est = ols_build(&model, &obs, &tol()).unwrap();
        let kg = &model.cov * obs.g.transpose();
        let s = &obs.g * &kg;
        let sampled = circle_directions(10_000)
            .iter()
            .map(|e| (&kg * e).norm() / (&s * e).norm())
            .fold(0.0, f64::max);
        let exact = operator_norm(&est).unwrap();
        assert!((sampled - exact).abs() <= 1e-6 * exact, "{sampled} vs {exact}");
        for c in [0.1, 10.0] {
            let scaled = ols_build(&model.scaled(c), &obs, &tol()).unwrap();
            assert!((operator_norm(&scaled).unwrap() - exact).abs() <= 1e-12 * exact);
        }
    }
}

#[test]
fn delta_norm_matches_sampled_supremum() {
    for seed in 0..5u64 {
        let a = random_model(seed, 5);
        let b = FiniteModel::new(a.mean.clone(), &a.cov + wishart(seed + 50, 5, 5) * 0.1, "b", &tol()).unwrap();
        let obs = random_obs(seed, 2, 5);
        let ba = ols_build(&a, &obs, &tol()).unwrap().gain;
        let bb = ols_build(&b, &obs, &tol()).unwrap().gain;
        let diff = &bb - &ba;
        let sampled = circle_directions(10_000)
            .iter()
            .map(|y| (&diff * y).norm())
            .fold(0.0, f64::max);
        let exact = delta_norm(&a, &b, &obs, &tol()).unwrap();
        assert!((sampled - exact).abs() <= 1e-6 * exact, "{sampled} vs {exact}");
    }
}

#[test]
fn delta_ratio_matches_sampled_supremum() {
    for seed in 0..5u64 {
        let a = random_model(seed, 5);
        let b = FiniteModel::new(a.mean.clone(), &a.cov + wishart(seed + 70, 5, 5) * 0.5, "b", &tol()).unwrap();
        let obs = random_obs(seed, 2, 5);
        let d = &b.cov - &a.cov;
        let dg = &d * obs.g.transpose();
        let gdg = &obs.g * &dg;
        let sampled = circle_directions(10_000)
            .iter()
            .map(|e| (&dg * e).norm() / (&gdg * e).norm())
            .fold(0.0, f64::max);
        let (exact, excluded) = delta_ratio(&a, &b, &obs, &tol()).unwrap();
        assert_eq!(excluded, 0);
        assert!((sampled - exact).abs() <= 1e-6 * exact, "{sampled} vs {exact}");
    }
}
