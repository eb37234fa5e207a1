//! Stochastic OLS conditioning and disintegration checks.
//!
//! The stochastic OLS estimator at data `y` is the OLS estimate translated by
//! the residual measure. Its convolution measure is the law of
//! `est(G v1) + (v2 - est(G v2))` for independent draws `v1, v2`; the
//! stochastic estimator disintegrates the original law exactly when the two
//! coincide.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Tolerance, Vector};
use crate::model::{self, AffineEstimator, FiniteModel, ObservationMap, OlsEstimator};
use crate::rng::{self, StreamRng};

/// Finitely many weighted atoms in `R^n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteMeasure {
    pub atoms: Vec<(f64, Vector)>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<(f64, Vector)>) -> Result<Self> {
        let n = atoms
            .first()
            .map(|(_, x)| x.len())
            .ok_or_else(|| Error::InvalidInput("discrete measure needs at least one atom".into()))?;
        if atoms.iter().any(|(_, x)| x.len() != n) {
            return Err(Error::DimensionMismatch("atoms of different dimension".into()));
        }
        if atoms
            .iter()
            .any(|(p, x)| !(p.is_finite() && *p >= 0.0) || x.iter().any(|e| !e.is_finite()))
        {
            return Err(Error::InvalidInput(
                "atom probabilities must be nonnegative and finite".into(),
            ));
        }
        let total: f64 = atoms.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("atom probabilities sum to {total}, not 1")));
        }
        Ok(DiscreteMeasure { atoms })
    }

    pub fn uniform(points: Vec<Vector>) -> Result<Self> {
        let w = 1.0 / points.len().max(1) as f64;
        DiscreteMeasure::new(points.into_iter().map(|x| (w, x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].1.len()
    }

    pub fn expectation(&self, s: impl Fn(&Vector) -> f64) -> f64 {
        self.atoms.iter().map(|(p, x)| p * s(x)).sum()
    }

    pub fn mean(&self) -> Vector {
        self.atoms
            .iter()
            .fold(Vector::zeros(self.dim()), |acc, (p, x)| acc + x * *p)
    }

    pub fn cov(&self) -> Matrix {
        let m = self.mean();
        self.atoms
            .iter()
            .fold(Matrix::zeros(self.dim(), self.dim()), |acc, (p, x)| {
                let c = x - &m;
                acc + &c * c.transpose() * *p
            })
    }

    /// Gaussian model with the same first two moments.
    pub fn moment_model(&self, tol: &Tolerance) -> Result<FiniteModel> {
        FiniteModel::new(self.mean(), linalg::symmetrize(&self.cov()), "discrete moments", tol)
    }

    /// Probability of the atom at `point` after merging coincident atoms.
    pub fn mass_at(&self, point: &Vector) -> f64 {
        let key = atom_key(point);
        self.atoms
            .iter()
            .filter(|(_, x)| atom_key(x) == key)
            .map(|(p, _)| p)
            .sum()
    }

    /// Merge coincident atoms; atoms are ordered by coordinates.
    pub fn merged(&self) -> DiscreteMeasure {
        let mut acc: BTreeMap<Vec<i64>, (f64, Vector)> = BTreeMap::new();
        for (p, x) in &self.atoms {
            acc.entry(atom_key(x)).or_insert_with(|| (0.0, x.clone())).0 += p;
        }
        DiscreteMeasure {
            atoms: acc.into_values().collect(),
        }
    }
}

fn atom_key(x: &Vector) -> Vec<i64> {
    x.iter().map(|e| (e * 1e9).round() as i64).collect()
}

/// Total-variation distance `sup_A |P(A) - Q(A)|` between discrete measures.
pub fn total_variation(p: &DiscreteMeasure, q: &DiscreteMeasure) -> f64 {
    let mut diff: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
    for (w, x) in &p.atoms {
        *diff.entry(atom_key(x)).or_default() += w;
    }
    for (w, x) in &q.atoms {
        *diff.entry(atom_key(x)).or_default() -= w;
    }
    0.5 * diff.values().map(|d| d.abs()).sum::<f64>()
}

/// Source of independent draws from a law on `R^n`.
pub trait Sampler: Sync {
    fn dim(&self) -> usize;

    fn draw(&self, rng: &mut StreamRng) -> Vector;
}

/// Gaussian law `m + F z`.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    mean: Vector,
    factor: Matrix,
}

impl GaussianSampler {
    pub fn new(model: &FiniteModel, tol: &Tolerance) -> Result<Self> {
        Ok(GaussianSampler {
            mean: model.mean.clone(),
            factor: linalg::psd_factor(&model.cov, tol)?,
        })
    }
}

impl Sampler for GaussianSampler {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn draw(&self, rng: &mut StreamRng) -> Vector {
        &self.mean + &self.factor * rng::standard_normal_vector(rng, self.factor.ncols())
    }
}

impl Sampler for DiscreteMeasure {
    fn dim(&self) -> usize {
        DiscreteMeasure::dim(self)
    }

    fn draw(&self, rng: &mut StreamRng) -> Vector {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (p, x) in &self.atoms {
            acc += p;
            if u < acc {
                return x.clone();
            }
        }
        self.atoms.last().expect("nonempty").1.clone()
    }
}

fn ensure_same_estimator(model: &FiniteModel, est: &OlsEstimator) -> Result<()> {
    if model.dim() != est.dim() || model.mean != est.mean || model.cov != est.cov {
        return Err(Error::InvalidInput("estimator was not built from this model".into()));
    }
    Ok(())
}

/// Residual measure: law of `v - est(G v)`, with mean `m - est(mY)` and
/// covariance `R K Rᵀ`. For OLS the identities `R K Rᵀ = R K = K Rᵀ` are
/// verified at tolerance.
pub fn residual_model(model: &FiniteModel, est: &OlsEstimator) -> Result<FiniteModel> {
    ensure_same_estimator(model, est)?;
    let r = &est.residual;
    let k = &model.cov;
    let rkr = r * k * r.transpose();
    let rk = r * k;
    let scale = 1.0 + k.norm();
    let defect = (&rkr - &rk).norm().max((&rkr - k * r.transpose()).norm());
    if defect > 1e-8 * scale {
        return Err(Error::Contract(format!(
            "residual covariance identities fail (defect {defect:.3e})"
        )));
    }
    let mean = &model.mean - est.as_affine().apply(&est.obs_mean);
    Ok(FiniteModel {
        mean,
        cov: linalg::symmetrize(&rkr),
        label: format!("{} residual", model.label),
    })
}

/// The stochastic OLS estimator at a fixed observation `y`.
#[derive(Debug, Clone)]
pub struct ConditionalModel {
    pub mean_map: AffineEstimator,
    pub y: Vector,
    pub mean: Vector,
    /// `R K`, symmetrized.
    pub residual_cov: Matrix,
    /// `R F` with `F Fᵀ = K`, so draws have covariance exactly `R K Rᵀ`.
    residual_factor: Matrix,
}

impl ConditionalModel {
    pub fn residual_factor(&self) -> &Matrix {
        &self.residual_factor
    }
}

pub fn conditional_gaussian(
    model: &FiniteModel,
    obs: &ObservationMap,
    y: &Vector,
    tol: &Tolerance,
) -> Result<ConditionalModel> {
    let est = model::ols_build(model, obs, tol)?;
    conditional_from(model, &est, y, tol)
}

pub fn conditional_from(
    model: &FiniteModel,
    est: &OlsEstimator,
    y: &Vector,
    tol: &Tolerance,
) -> Result<ConditionalModel> {
    ensure_same_estimator(model, est)?;
    let mean = est.estimate(y)?;
    let factor = linalg::psd_factor(&model.cov, tol)?;
    Ok(ConditionalModel {
        mean_map: est.as_affine(),
        y: y.clone(),
        mean,
        residual_cov: linalg::symmetrize(&(&est.residual * &model.cov)),
        residual_factor: &est.residual * factor,
    })
}

/// `N` draws from the stochastic OLS estimator; every draw lies on the fiber `G v = y`.
pub fn stochastic_ols_sample(cond: &ConditionalModel, seed: u64, n: usize) -> Vec<Vector> {
    model::sample_with_factor(&cond.mean, &cond.residual_factor, seed, 0x5354, n)
}

/// Largest `‖G v - y‖` over the samples.
pub fn fiber_defect(obs: &ObservationMap, y: &Vector, samples: &[Vector]) -> f64 {
    samples.iter().map(|v| (obs.apply(v) - y).norm()).fold(0.0, f64::max)
}

/// Draws `est(G v1) + (v2 - est(G v2))` for independent `v1, v2`.
pub fn convolution_sample<S: Sampler>(
    law: &S,
    obs: &ObservationMap,
    est: &AffineEstimator,
    seed: u64,
    n: usize,
) -> Vec<Vector> {
    rng::par_draws(seed, 0x434f, n, |r| {
        let v1 = law.draw(r);
        let v2 = law.draw(r);
        convolve(obs, est, &v1, &v2)
    })
}

fn convolve(obs: &ObservationMap, est: &AffineEstimator, v1: &Vector, v2: &Vector) -> Vector {
    est.apply(&obs.apply(v1)) + v2 - est.apply(&obs.apply(v2))
}

/// Exact convolution measure of a discrete law by pairwise enumeration.
pub fn convolution_measure(law: &DiscreteMeasure, obs: &ObservationMap, est: &AffineEstimator) -> DiscreteMeasure {
    let mut atoms = Vec::with_capacity(law.atoms.len() * law.atoms.len());
    for (p1, v1) in &law.atoms {
        for (p2, v2) in &law.atoms {
            atoms.push((p1 * p2, convolve(obs, est, v1, v2)));
        }
    }
    DiscreteMeasure { atoms }.merged()
}

/// Bounded test function `s: R^n -> R`.
pub struct TestFunction {
    pub name: String,
    pub eval: Box<dyn Fn(&Vector) -> f64 + Send + Sync>,
}

impl TestFunction {
    pub fn new(name: impl Into<String>, eval: impl Fn(&Vector) -> f64 + Send + Sync + 'static) -> Self {
        TestFunction {
            name: name.into(),
            eval: Box::new(eval),
        }
    }

    pub fn indicator(point: Vector) -> Self {
        let key = atom_key(&point);
        let name = format!("indicator{:?}", point.as_slice());
        TestFunction::new(name, move |v| if atom_key(v) == key { 1.0 } else { 0.0 })
    }
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestFunction").field("name", &self.name).finish()
    }
}

/// Constant, coordinates, pairwise products and five seeded `tanh(wᵀv + b)`.
pub fn default_battery(n: usize, seed: u64) -> Vec<TestFunction> {
    let mut out = vec![TestFunction::new("constant", |_| 1.0)];
    for i in 0..n {
        out.push(TestFunction::new(format!("v{i}"), move |v| v[i]));
    }
    for i in 0..n {
        for j in i..n {
            out.push(TestFunction::new(format!("v{i}*v{j}"), move |v| v[i] * v[j]));
        }
    }
    let mut r = rng::seeded(seed, 0x5446);
    for k in 0..5 {
        let w = rng::standard_normal_vector(&mut r, n) / (n.max(1) as f64).sqrt();
        let b: f64 = r.sample(rand_distr::StandardNormal);
        out.push(TestFunction::new(format!("tanh{k}"), move |v| (w.dot(v) + b).tanh()));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestFunctionResult {
    pub name: String,
    /// `E_P[s]`.
    pub original: f64,
    /// `E_{P_Y}[ E_{P|Y=y}[s] ]`.
    pub nested: f64,
    pub difference: f64,
    /// Standard error of the difference (zero for exact enumeration).
    pub standard_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisintegrationReport {
    pub method: String,
    pub samples: usize,
    pub sigma: f64,
    pub results: Vec<TestFunctionResult>,
    pub pass: bool,
}

pub const DISINTEGRATION_SIGMA: f64 = 4.0;

/// Paired Monte-Carlo check of the disintegration equation.
///
/// Draw `k` pairs `(v1, v2)`; `s(v1)` samples the original law and
/// `s(est(G v1) + v2 - est(G v2))` samples the nested conditional
/// expectation at `y = G v1`. A function passes when the mean paired
/// difference is within `4` standard errors.
pub fn disintegration_check<S: Sampler>(
    law: &S,
    obs: &ObservationMap,
    est: &AffineEstimator,
    tests: &[TestFunction],
    seed: u64,
    n: usize,
) -> DisintegrationReport {
    let pairs: Vec<(Vector, Vector)> = rng::par_draws(seed, 0x4449, n, |r| {
        let v1 = law.draw(r);
        let v2 = law.draw(r);
        let conv = convolve(obs, est, &v1, &v2);
        (v1, conv)
    });
    let results: Vec<TestFunctionResult> = tests
        .iter()
        .map(|t| {
            let (mut sa, mut sb) = (0.0, 0.0);
            let diffs: Vec<f64> = pairs
                .iter()
                .map(|(v, c)| {
                    let a = (t.eval)(v);
                    let b = (t.eval)(c);
                    sa += a;
                    sb += b;
                    a - b
                })
                .collect();
            let nf = n as f64;
            let mean_d = diffs.iter().sum::<f64>() / nf;
            let var_d = diffs.iter().map(|d| (d - mean_d).powi(2)).sum::<f64>() / (nf - 1.0).max(1.0);
            let se = (var_d / nf).sqrt();
            TestFunctionResult {
                name: t.name.clone(),
                original: sa / nf,
                nested: sb / nf,
                difference: mean_d,
                standard_error: se,
                pass: mean_d.abs() <= DISINTEGRATION_SIGMA * se + 1e-12,
            }
        })
        .collect();
    DisintegrationReport {
        method: "paired-monte-carlo".into(),
        samples: n,
        sigma: DISINTEGRATION_SIGMA,
        pass: results.iter().all(|r| r.pass),
        results,
    }
}

/// Largest atom count handled by exact enumeration.
pub const ENUMERATION_LIMIT: usize = 10_000;

/// Exact disintegration check for a discrete law by enumeration.
pub fn disintegration_check_exact(
    law: &DiscreteMeasure,
    obs: &ObservationMap,
    est: &AffineEstimator,
    tests: &[TestFunction],
) -> Result<DisintegrationReport> {
    if law.atoms.len() > ENUMERATION_LIMIT {
        return Err(Error::InvalidInput(format!(
            "{} atoms exceed the enumeration limit {ENUMERATION_LIMIT}",
            law.atoms.len()
        )));
    }
    let conv = convolution_measure(law, obs, est);
    let results: Vec<TestFunctionResult> = tests
        .iter()
        .map(|t| {
            let original = law.expectation(|v| (t.eval)(v));
            let nested = conv.expectation(|v| (t.eval)(v));
            let difference = original - nested;
            TestFunctionResult {
                name: t.name.clone(),
                original,
                nested,
                difference,
                standard_error: 0.0,
                pass: difference.abs() <= 1e-12,
            }
        })
        .collect();
    Ok(DisintegrationReport {
        method: "enumeration".into(),
        samples: law.atoms.len() * law.atoms.len(),
        sigma: 0.0,
        pass: results.iter().all(|r| r.pass),
        results,
    })
}

/// Discrete law check: exact enumeration when small enough, otherwise paired MC.
pub fn disintegration_check_discrete(
    law: &DiscreteMeasure,
    obs: &ObservationMap,
    tests: &[TestFunction],
    seed: u64,
    n: usize,
    tol: &Tolerance,
) -> Result<DisintegrationReport> {
    let est = model::ols_build(&law.moment_model(tol)?, obs, tol)?.as_affine();
    if law.atoms.len() <= ENUMERATION_LIMIT {
        disintegration_check_exact(law, obs, &est, tests)
    } else {
        Ok(disintegration_check(law, obs, &est, tests, seed, n))
    }
}

/// Gaussian model check with the OLS estimator.
pub fn disintegration_check_gaussian(
    model: &FiniteModel,
    obs: &ObservationMap,
    tests: &[TestFunction],
    seed: u64,
    n: usize,
    tol: &Tolerance,
) -> Result<DisintegrationReport> {
    let est = model::ols_build(model, obs, tol)?.as_affine();
    let law = GaussianSampler::new(model, tol)?;
    Ok(disintegration_check(&law, obs, &est, tests, seed, n))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UiiReport {
    /// `E[v1 v2] - E[v1] E[v2]` under the original law.
    pub coordinate_covariance: f64,
    pub forbidden_point: Vec<f64>,
    pub forbidden_mass_original: f64,
    pub forbidden_mass_convolution: f64,
    pub total_variation: f64,
    pub convolution: DiscreteMeasure,
    /// The forbidden-atom indicator fails the exact disintegration check.
    pub disintegration_violated: bool,
}

/// Uniform law on `{(±1, 0), (0, ±1)}` observed through its first
/// coordinate: uncorrelated coordinates that are not independent, so the
/// convolution measure differs from the law.
pub fn uii_counterexample() -> (DiscreteMeasure, ObservationMap, UiiReport) {
    let pts = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)];
    let law = DiscreteMeasure::uniform(pts.iter().map(|&(a, b)| Vector::from_column_slice(&[a, b])).collect())
        .expect("valid four-atom law");
    let obs = ObservationMap {
        g: Matrix::from_row_slice(1, 2, &[1.0, 0.0]),
    };
    let tol = Tolerance::default();
    let est = model::ols_build(&law.moment_model(&tol).expect("moments are PSD"), &obs, &tol)
        .expect("OLS on a 2x2 model")
        .as_affine();
    let conv = convolution_measure(&law, &obs, &est);
    let forbidden = Vector::from_column_slice(&[1.0, 1.0]);
    let cov = law.cov();
    let exact = disintegration_check_exact(&law, &obs, &est, &[TestFunction::indicator(forbidden.clone())])
        .expect("four atoms");
    let report = UiiReport {
        coordinate_covariance: cov[(0, 1)],
        forbidden_point: forbidden.iter().cloned().collect(),
        forbidden_mass_original: law.mass_at(&forbidden),
        forbidden_mass_convolution: conv.mass_at(&forbidden),
        total_variation: total_variation(&law, &conv),
        disintegration_violated: !exact.pass,
        convolution: conv,
    };
    (law, obs, report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn m(rows: usize, cols: usize, data: &[f64]) -> Matrix {
        Matrix::from_row_slice(rows, cols, data)
    }

    fn v(data: &[f64]) -> Vector {
        Vector::from_column_slice(data)
    }

    fn bivariate(rho: f64) -> (FiniteModel, ObservationMap) {
        (
            FiniteModel::centered(m(2, 2, &[1.0, rho, rho, 1.0]), "biv", &tol()).unwrap(),
            ObservationMap::new(m(1, 2, &[1.0, 0.0])).unwrap(),
        )
    }

    #[test]
    fn discrete_measure_validation() {
        assert!(DiscreteMeasure::new(vec![(0.5, v(&[1.0])), (0.4, v(&[2.0]))]).is_err());
        assert!(DiscreteMeasure::new(vec![(1.5, v(&[1.0])), (-0.5, v(&[2.0]))]).is_err());
        assert!(DiscreteMeasure::new(vec![(0.5, v(&[1.0])), (0.5, v(&[2.0, 1.0]))]).is_err());
    }

    #[test]
    fn residual_model_extremes() {
        let (model, _) = bivariate(0.3);
        let full = model::ols_build(&model, &ObservationMap::identity(2), &tol()).unwrap();
        let r = residual_model(&model, &full).unwrap();
        assert!(r.cov.norm() < 1e-14 && r.mean.norm() < 1e-14);
        let mut shifted = model.clone();
        shifted.mean = v(&[1.0, 2.0]);
        let none = model::ols_build(&shifted, &ObservationMap::zero(1, 2), &tol()).unwrap();
        let r = residual_model(&shifted, &none).unwrap();
        assert_eq!(r.cov, shifted.cov);
        assert!(r.mean.norm() < 1e-14);
        assert!(residual_model(&model, &none).is_err());
    }

    #[test]
    fn conditional_bivariate_schur() {
        let (model, obs) = bivariate(0.8);
        let c = conditional_gaussian(&model, &obs, &v(&[1.5]), &tol()).unwrap();
        assert!((&c.mean - v(&[1.5, 1.2])).norm() < 1e-14);
        assert!((&c.residual_cov - m(2, 2, &[0.0, 0.0, 0.0, 0.36])).norm() < 1e-14);
        let at_mean = conditional_gaussian(&model, &obs, &v(&[0.0]), &tol()).unwrap();
        assert!(at_mean.mean.norm() < 1e-15);
    }

    #[test]
    fn conditional_identity_is_point_mass() {
        let (model, _) = bivariate(0.5);
        let y = v(&[0.2, -0.7]);
        let c = conditional_gaussian(&model, &ObservationMap::identity(2), &y, &tol()).unwrap();
        assert!((&c.mean - &y).norm() < 1e-14 && c.residual_cov.norm() < 1e-14);
        let draws = stochastic_ols_sample(&c, 1, 100);
        assert!(draws.iter().all(|d| (d - &y).norm() < 1e-12));
    }

    #[test]
    fn stochastic_draws_on_fiber() {
        let (model, obs) = bivariate(0.8);
        let y = v(&[-0.4]);
        let c = conditional_gaussian(&model, &obs, &y, &tol()).unwrap();
        let draws = stochastic_ols_sample(&c, 5, 10_000);
        assert!(fiber_defect(&obs, &y, &draws) < 1e-8);
    }

    #[test]
    fn convolution_with_identity_reproduces_first_draw() {
        let (model, _) = bivariate(0.2);
        let obs = ObservationMap::identity(2);
        let est = model::ols_build(&model, &obs, &tol()).unwrap().as_affine();
        let law = GaussianSampler::new(&model, &tol()).unwrap();
        let conv = convolution_sample(&law, &obs, &est, 3, 50);
        let firsts: Vec<Vector> = rng::par_draws(3, 0x434f, 50, |r| {
            let v1 = law.draw(r);
            let _ = law.draw(r);
            v1
        });
        for (a, b) in conv.iter().zip(&firsts) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn constant_test_function_equal_exactly() {
        let (model, obs) = bivariate(0.6);
        let tests = vec![TestFunction::new("one", |_| 1.0)];
        let rep = disintegration_check_gaussian(&model, &obs, &tests, 2, 1000, &tol()).unwrap();
        assert_eq!(rep.results[0].difference, 0.0);
        assert!(rep.pass);
    }

    #[test]
    fn battery_size() {
        // 1 constant + 3 coordinates + 6 products + 5 tanh
        assert_eq!(default_battery(3, 0).len(), 15);
    }

    #[test]
    fn uii_counterexample_exact_values() {
        let (law, _, rep) = uii_counterexample();
        assert_eq!(law.atoms.len(), 4);
        assert_eq!(rep.coordinate_covariance, 0.0);
        assert_eq!(rep.forbidden_mass_original, 0.0);
        assert_eq!(rep.forbidden_mass_convolution, 1.0 / 16.0);
        assert_eq!(rep.total_variation, 0.5);
        assert!(rep.total_variation >= 1.0 / 16.0);
        assert!(rep.disintegration_violated);
        assert_eq!(rep.convolution.atoms.len(), 9);
    }

    #[test]
    fn total_variation_basics() {
        let a = DiscreteMeasure::uniform(vec![v(&[0.0]), v(&[1.0])]).unwrap();
        let b = DiscreteMeasure::new(vec![(1.0, v(&[0.0]))]).unwrap();
        assert_eq!(total_variation(&a, &a), 0.0);
        assert_eq!(total_variation(&a, &b), 0.5);
    }
}
