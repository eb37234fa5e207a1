//! Finite-dimensional Gaussian models, the OLS estimator and its risk
//! functionals.
//!
//! A model is a mean `m` and PSD covariance `K` on `R^n`; an observation map
//! is a `p x n` matrix `G`. The OLS estimator is the affine map
//! `y ↦ m + B (y - G m)` with gain `B = K Gᵀ (G K Gᵀ)⁺`, defined on the affine
//! support `G m + range(G K Gᵀ)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Tolerance, Vector};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteModel {
    pub mean: Vector,
    pub cov: Matrix,
    pub label: String,
}

impl FiniteModel {
    pub fn new(mean: Vector, cov: Matrix, label: impl Into<String>, tol: &Tolerance) -> Result<Self> {
        let model = FiniteModel {
            mean,
            cov,
            label: label.into(),
        };
        model.validate(tol)?;
        Ok(model)
    }

    pub fn centered(cov: Matrix, label: impl Into<String>, tol: &Tolerance) -> Result<Self> {
        let n = cov.nrows();
        FiniteModel::new(Vector::zeros(n), cov, label, tol)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn validate(&self, tol: &Tolerance) -> Result<()> {
        linalg::ensure_finite_vec(&self.mean, "model mean")?;
        if self.cov.shape() != (self.dim(), self.dim()) {
            return Err(Error::DimensionMismatch(format!(
                "mean of length {} with covariance {:?}",
                self.dim(),
                self.cov.shape()
            )));
        }
        linalg::psd_factor(&self.cov, tol).map(|_| ())
    }

    /// Same model with covariance scaled by `c`.
    pub fn scaled(&self, c: f64) -> FiniteModel {
        FiniteModel {
            mean: self.mean.clone(),
            cov: &self.cov * c,
            label: format!("{} (cov x{c})", self.label),
        }
    }
}

/// Continuous linear observation map `G: R^n -> R^p`; its adjoint is `Gᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationMap {
    pub g: Matrix,
}

impl ObservationMap {
    pub fn new(g: Matrix) -> Result<Self> {
        linalg::ensure_finite(&g, "observation map")?;
        Ok(ObservationMap { g })
    }

    pub fn identity(n: usize) -> Self {
        ObservationMap {
            g: Matrix::identity(n, n),
        }
    }

    pub fn zero(p: usize, n: usize) -> Self {
        ObservationMap { g: Matrix::zeros(p, n) }
    }

    pub fn input_dim(&self) -> usize {
        self.g.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        &self.g * v
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &ObservationMap) -> Result<ObservationMap> {
        if first.output_dim() != self.input_dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {}x{} after {}x{}",
                self.output_dim(),
                self.input_dim(),
                first.output_dim(),
                first.input_dim()
            )));
        }
        Ok(ObservationMap { g: &self.g * &first.g })
    }
}

fn check_dims(model: &FiniteModel, obs: &ObservationMap) -> Result<()> {
    if obs.input_dim() != model.dim() {
        return Err(Error::DimensionMismatch(format!(
            "observation map takes R^{} but model lives in R^{}",
            obs.input_dim(),
            model.dim()
        )));
    }
    Ok(())
}

/// Law of `G v`: mean `G m`, covariance `G K Gᵀ`.
pub fn pushforward(model: &FiniteModel, obs: &ObservationMap) -> Result<FiniteModel> {
    check_dims(model, obs)?;
    Ok(FiniteModel {
        mean: obs.apply(&model.mean),
        cov: linalg::symmetrize(&(&obs.g * &model.cov * obs.g.transpose())),
        label: format!("{} pushed forward", model.label),
    })
}

/// Affine estimator `y ↦ offset + gain · y`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineEstimator {
    pub offset: Vector,
    pub gain: Matrix,
}

impl AffineEstimator {
    /// `y ↦ m + gain (y - G m)`, which is unbiased whenever `gain` is a right inverse.
    pub fn centered(model: &FiniteModel, obs: &ObservationMap, gain: Matrix) -> Result<Self> {
        check_dims(model, obs)?;
        if gain.shape() != (model.dim(), obs.output_dim()) {
            return Err(Error::DimensionMismatch(format!(
                "gain must be {}x{}, got {:?}",
                model.dim(),
                obs.output_dim(),
                gain.shape()
            )));
        }
        let offset = &model.mean - &gain * obs.apply(&model.mean);
        Ok(AffineEstimator { offset, gain })
    }

    pub fn apply(&self, y: &Vector) -> Vector {
        &self.offset + &self.gain * y
    }
}

/// What to do with data outside the closed affine support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SupportPolicy {
    #[default]
    Reject,
    /// Project `y` onto the affine support before estimating.
    Project,
}

/// The OLS estimator together with its lifted and residual operators.
#[derive(Debug, Clone)]
pub struct OlsEstimator {
    /// `B = K Gᵀ S⁺` with `S = G K Gᵀ`.
    pub gain: Matrix,
    /// Orthogonal projector onto `range(S)`.
    pub range_projector: Matrix,
    /// `L = B G`.
    pub lifted: Matrix,
    /// `R = I - L`.
    pub residual: Matrix,
    pub mean: Vector,
    pub obs_mean: Vector,
    pub cov: Matrix,
    pub obs: ObservationMap,
    pub tol: Tolerance,
}

pub fn ols_build(model: &FiniteModel, obs: &ObservationMap, tol: &Tolerance) -> Result<OlsEstimator> {
    check_dims(model, obs)?;
    model.validate(tol)?;
    let g = &obs.g;
    let k = &model.cov;
    let s = linalg::symmetrize(&(g * k * g.transpose()));
    let s_pinv = linalg::pinv(&s, tol)?;
    let range_projector = linalg::range_projector(&s, tol)?;
    let gain = k * g.transpose() * s_pinv;
    let lifted = &gain * g;
    let residual = Matrix::identity(model.dim(), model.dim()) - &lifted;
    Ok(OlsEstimator {
        gain,
        range_projector,
        lifted,
        residual,
        mean: model.mean.clone(),
        obs_mean: obs.apply(&model.mean),
        cov: k.clone(),
        obs: obs.clone(),
        tol: *tol,
    })
}

impl OlsEstimator {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_mean.len()
    }

    /// Residual of `y - mY` outside `range(S)`, and the allowed bound.
    pub fn support_residual(&self, y: &Vector) -> Result<(f64, f64)> {
        if y.len() != self.obs_dim() {
            return Err(Error::DimensionMismatch(format!(
                "data of length {} for an observation space of dimension {}",
                y.len(),
                self.obs_dim()
            )));
        }
        linalg::ensure_finite_vec(y, "data")?;
        let r = y - &self.obs_mean;
        let outside = &r - &self.range_projector * &r;
        Ok((outside.norm(), self.tol.support * r.norm()))
    }

    /// `v̂ = m + B (y - mY)`; rejects data outside the affine support.
    pub fn estimate(&self, y: &Vector) -> Result<Vector> {
        self.estimate_with(y, SupportPolicy::Reject)
    }

    pub fn estimate_with(&self, y: &Vector, policy: SupportPolicy) -> Result<Vector> {
        let (residual, allowed) = self.support_residual(y)?;
        if policy == SupportPolicy::Reject && residual > allowed {
            return Err(Error::SupportViolation { residual, allowed });
        }
        // B = B P, so the projection is implicit in the gain.
        Ok(&self.mean + &self.gain * (y - &self.obs_mean))
    }

    pub fn as_affine(&self) -> AffineEstimator {
        AffineEstimator {
            offset: &self.mean - &self.gain * &self.obs_mean,
            gain: self.gain.clone(),
        }
    }

    pub fn is_full_rank(&self) -> bool {
        let p = self.obs_dim();
        (&self.range_projector - Matrix::identity(p, p)).norm() <= 1e-8
    }
}

pub fn ols_estimate(est: &OlsEstimator, y: &Vector) -> Result<Vector> {
    est.estimate(y)
}

/// Frobenius defect `‖B^{2,1} - B^1 B^2‖` of contravariance, where `B^2` is
/// built against the pushforward of the model through `first`.
pub fn contravariance_check(
    model: &FiniteModel,
    first: &ObservationMap,
    second: &ObservationMap,
    tol: &Tolerance,
) -> Result<f64> {
    let chain = second.compose(first)?;
    let direct = ols_build(model, &chain, tol)?;
    let est1 = ols_build(model, first, tol)?;
    let est2 = ols_build(&pushforward(model, first)?, second, tol)?;
    Ok((direct.gain - est1.gain * est2.gain).norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskReport {
    pub estvar: f64,
    pub mse: f64,
    pub bias: f64,
    pub identity_residual: f64,
}

fn right_inverse_defect(obs: &ObservationMap, gain: &Matrix, projector: &Matrix) -> f64 {
    (&obs.g * gain - projector).norm()
}

fn right_inverse_bound(obs: &ObservationMap, gain: &Matrix) -> f64 {
    1e-8 * (1.0 + obs.g.norm() * gain.norm())
}

/// Estimated variance, mean-squared error and bias of the functional `f`
/// under an affine estimator whose gain is a right inverse of `G` on
/// `range(G K Gᵀ)`.
pub fn risk(
    model: &FiniteModel,
    obs: &ObservationMap,
    est: &AffineEstimator,
    f: &Vector,
    tol: &Tolerance,
) -> Result<RiskReport> {
    check_dims(model, obs)?;
    if f.len() != model.dim() || est.gain.shape() != (model.dim(), obs.output_dim()) {
        return Err(Error::DimensionMismatch(
            "functional or gain has the wrong shape".into(),
        ));
    }
    let s = &obs.g * &model.cov * obs.g.transpose();
    let projector = linalg::range_projector(&s, tol)?;
    let defect = right_inverse_defect(obs, &est.gain, &projector);
    if defect > right_inverse_bound(obs, &est.gain) {
        return Err(Error::Contract(format!(
            "gain is not a right inverse of the observation map (defect {defect:.3e})"
        )));
    }
    Ok(risk_unchecked(model, obs, est, f))
}

fn risk_unchecked(model: &FiniteModel, obs: &ObservationMap, est: &AffineEstimator, f: &Vector) -> RiskReport {
    let k = &model.cov;
    // L*f = Gᵀ gainᵀ f and R*f = f - L*f.
    let lf = obs.g.transpose() * (est.gain.transpose() * f);
    let rf = f - &lf;
    let estvar = lf.dot(&(k * &lf));
    let mean_residual = rf.dot(&model.mean) - f.dot(&est.offset);
    let mse = rf.dot(&(k * &rf)) + mean_residual * mean_residual;
    let bias = -mean_residual;
    let var_f = f.dot(&(k * f));
    let cov_lf_f = lf.dot(&(k * f));
    let identity_residual = (mse - (bias * bias + estvar + var_f - 2.0 * cov_lf_f)).abs();
    RiskReport {
        estvar,
        mse,
        bias,
        identity_residual,
    }
}

/// `B + (I - B G) N P` for a seeded standard-normal `N`.
pub fn random_right_inverse(est: &OlsEstimator, seed: u64) -> Result<Matrix> {
    if !est.is_full_rank() {
        let rank = linalg::rank(&est.range_projector, &est.tol)?;
        return Err(Error::RankDeficient {
            rank,
            dim: est.obs_dim(),
        });
    }
    let mut rng = rng::seeded(seed, 0x5249);
    let noise = rng::standard_normal_matrix(&mut rng, est.dim(), est.obs_dim());
    Ok(perturbed_right_inverse(est, &noise))
}

pub fn perturbed_right_inverse(est: &OlsEstimator, noise: &Matrix) -> Matrix {
    &est.gain + &est.residual * noise * &est.range_projector
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GmtEntry {
    pub estvar: f64,
    pub mse: f64,
    pub bias: f64,
    pub identity_residual: f64,
    /// `estvar_alt - estvar_ols`.
    pub estvar_slack: f64,
    /// `mse_alt - bias_alt² - mse_ols`.
    pub mse_slack: f64,
    pub estvar_holds: bool,
    pub mse_holds: bool,
    /// Adjoint actions on `f` coincide: `gain_altᵀ f = Bᵀ f`.
    pub adjoint_equal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GmtReport {
    pub ols: RiskReport,
    pub entries: Vec<GmtEntry>,
    pub estvar_all_hold: bool,
    pub mse_all_hold: bool,
    /// Every saturated MSE inequality coincides with equal adjoint actions.
    pub equality_consistent: bool,
    pub max_identity_residual: f64,
}

pub const GMT_SLACK: f64 = 1e-10;

/// Compare the OLS estimator with alternative affine estimators on `f`.
pub fn gmt_compare(
    model: &FiniteModel,
    obs: &ObservationMap,
    f: &Vector,
    alternatives: &[AffineEstimator],
    tol: &Tolerance,
) -> Result<GmtReport> {
    let est = ols_build(model, obs, tol)?;
    let ols = risk(model, obs, &est.as_affine(), f, tol)?;
    let ols_action = est.gain.transpose() * f;
    let scale = 1.0 + ols_action.norm();
    let mut entries = Vec::with_capacity(alternatives.len());
    for alt in alternatives {
        let r = risk(model, obs, alt, f, tol)?;
        let estvar_slack = r.estvar - ols.estvar;
        let mse_slack = r.mse - r.bias * r.bias - ols.mse;
        let adjoint_equal = (alt.gain.transpose() * f - &ols_action).norm() <= 1e-10 * scale;
        entries.push(GmtEntry {
            estvar: r.estvar,
            mse: r.mse,
            bias: r.bias,
            identity_residual: r.identity_residual,
            estvar_slack,
            mse_slack,
            estvar_holds: estvar_slack >= -GMT_SLACK,
            mse_holds: mse_slack >= -GMT_SLACK,
            adjoint_equal,
        });
    }
    let saturation = |e: &GmtEntry| e.mse_slack.abs() <= 1e-10 * (1.0 + ols.mse.abs());
    Ok(GmtReport {
        estvar_all_hold: entries.iter().all(|e| e.estvar_holds),
        mse_all_hold: entries.iter().all(|e| e.mse_holds),
        equality_consistent: entries.iter().all(|e| !e.adjoint_equal || saturation(e)),
        max_identity_residual: entries
            .iter()
            .map(|e| e.identity_residual)
            .fold(ols.identity_residual, f64::max),
        ols,
        entries,
    })
}

/// `M = ‖B P‖₂`, the operator norm of the OLS estimator on `range(S)`.
pub fn operator_norm(est: &OlsEstimator) -> Result<f64> {
    linalg::spectral_norm(&(&est.gain * &est.range_projector))
}

/// `Δ = ‖B' P' - B P‖₂`, the operator norm of the difference of two OLS
/// estimators for the same observation map.
pub fn delta_norm(a: &FiniteModel, b: &FiniteModel, obs: &ObservationMap, tol: &Tolerance) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch("models of different dimension".into()));
    }
    if a.cov == b.cov {
        return Ok(0.0);
    }
    let ea = ols_build(a, obs, tol)?;
    let eb = ols_build(b, obs, tol)?;
    linalg::spectral_norm(&(&eb.gain * &eb.range_projector - &ea.gain * &ea.range_projector))
}

/// The ratio `sup_e ‖D Gᵀ e‖ / ‖G D Gᵀ e‖` with `D = K' - K`, evaluated as
/// `‖D Gᵀ (G D Gᵀ)⁺‖₂` on the range of `G D Gᵀ`.
///
/// This is homogeneous of degree zero in `D`, so it does not shrink as
/// `K' → K`; [`delta_norm`] is the quantity that does. The second value is the
/// dimension of `e` directions excluded because `G D Gᵀ e = 0` while
/// `D Gᵀ e ≠ 0`.
pub fn delta_ratio(a: &FiniteModel, b: &FiniteModel, obs: &ObservationMap, tol: &Tolerance) -> Result<(f64, usize)> {
    check_dims(a, obs)?;
    check_dims(b, obs)?;
    let d = &b.cov - &a.cov;
    if d.iter().all(|x| *x == 0.0) {
        return Ok((0.0, 0));
    }
    let dg = &d * obs.g.transpose();
    let gdg = linalg::symmetrize(&(&obs.g * &dg));
    let ratio = linalg::spectral_norm(&(&dg * linalg::pinv(&gdg, tol)?))?;
    let excluded = linalg::rank(&dg, tol)?.saturating_sub(linalg::rank(&gdg, tol)?);
    Ok((ratio, excluded))
}

/// Paley-Wiener functional `(K⁺ u) · (v - m)` for `u ∈ range(K)`.
pub fn paley_wiener(model: &FiniteModel, u: &Vector, v: &Vector, tol: &Tolerance) -> Result<f64> {
    Ok(PaleyWiener::new(model, u, tol)?.apply(v))
}

/// Precomputed Paley-Wiener functional for repeated evaluation.
#[derive(Debug, Clone)]
pub struct PaleyWiener {
    weights: Vector,
    mean: Vector,
}

impl PaleyWiener {
    pub fn new(model: &FiniteModel, u: &Vector, tol: &Tolerance) -> Result<Self> {
        if u.len() != model.dim() {
            return Err(Error::DimensionMismatch("u has the wrong length".into()));
        }
        let projector = linalg::range_projector(&model.cov, tol)?;
        let outside = (u - &projector * u).norm();
        if outside > tol.support * u.norm().max(1.0) {
            return Err(Error::OutsideRange { residual: outside });
        }
        Ok(PaleyWiener {
            weights: linalg::pinv(&model.cov, tol)? * u,
            mean: model.mean.clone(),
        })
    }

    pub fn apply(&self, v: &Vector) -> f64 {
        self.weights.dot(&(v - &self.mean))
    }

    /// `uᵀ K⁺ u` in Cameron-Martin form.
    pub fn weights(&self) -> &Vector {
        &self.weights
    }
}

/// `N` draws `m + F z` with `F = psd_factor(K)`, deterministic in `seed`.
pub fn sample(model: &FiniteModel, seed: u64, n: usize, tol: &Tolerance) -> Result<Vec<Vector>> {
    let factor = linalg::psd_factor(&model.cov, tol)?;
    Ok(sample_with_factor(&model.mean, &factor, seed, 0, n))
}

pub(crate) fn sample_with_factor(mean: &Vector, factor: &Matrix, seed: u64, stream_base: u64, n: usize) -> Vec<Vector> {
    let k = factor.ncols();
    rng::par_draws(seed, stream_base, n, |r| {
        mean + factor * rng::standard_normal_vector(r, k)
    })
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

    fn two_dim() -> (FiniteModel, ObservationMap) {
        let model = FiniteModel::centered(m(2, 2, &[2.0, 1.0, 1.0, 1.0]), "2d", &tol()).unwrap();
        (model, ObservationMap::new(m(1, 2, &[1.0, 0.0])).unwrap())
    }

    #[test]
    fn pushforward_identity_and_zero() {
        let (model, _) = two_dim();
        let same = pushforward(&model, &ObservationMap::identity(2)).unwrap();
        assert_eq!(same.mean, model.mean);
        assert_eq!(same.cov, model.cov);
        let zero = pushforward(&model, &ObservationMap::zero(3, 2)).unwrap();
        assert_eq!(zero.cov, Matrix::zeros(3, 3));
        assert!(pushforward(&model, &ObservationMap::zero(3, 4)).is_err());
    }

    #[test]
    fn ols_gain_two_dim() {
        let (model, obs) = two_dim();
        let est = ols_build(&model, &obs, &tol()).unwrap();
        assert!((&est.gain - v(&[1.0, 0.5])).norm() < 1e-14);
        let vhat = est.estimate(&v(&[2.0])).unwrap();
        assert!((vhat - v(&[2.0, 1.0])).norm() < 1e-14);
    }

    #[test]
    fn ols_orthonormal_rows_identity_cov() {
        let model = FiniteModel::centered(Matrix::identity(3, 3), "iso", &tol()).unwrap();
        let s = 0.5f64.sqrt();
        let obs = ObservationMap::new(m(2, 3, &[s, s, 0.0, 0.0, 0.0, 1.0])).unwrap();
        let est = ols_build(&model, &obs, &tol()).unwrap();
        assert!((&est.gain - obs.g.transpose()).norm() < 1e-14);
        assert!((operator_norm(&est).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ols_maps_mean_to_mean_and_identity_obs() {
        let cov = m(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.0, 0.2, 0.1, 0.2, 0.5]);
        let model = FiniteModel::new(v(&[1.0, -2.0, 0.5]), cov, "m", &tol()).unwrap();
        let obs = ObservationMap::identity(3);
        let est = ols_build(&model, &obs, &tol()).unwrap();
        assert!((est.estimate(&model.mean).unwrap() - &model.mean).norm() < 1e-12);
        let y = v(&[0.3, 0.4, -5.0]);
        assert!((est.estimate(&y).unwrap() - &y).norm() < 1e-12);
    }

    #[test]
    fn support_violation_and_projection() {
        // rank-one covariance: the support is the line spanned by (1, 1)
        let model = FiniteModel::centered(m(2, 2, &[1.0, 1.0, 1.0, 1.0]), "line", &tol()).unwrap();
        let est = ols_build(&model, &ObservationMap::identity(2), &tol()).unwrap();
        let err = est.estimate(&v(&[1.0, 0.0])).unwrap_err();
        match err {
            Error::SupportViolation { residual, .. } => assert!((residual - 0.5f64.sqrt()).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        let projected = est.estimate_with(&v(&[1.0, 0.0]), SupportPolicy::Project).unwrap();
        assert!((projected - v(&[0.5, 0.5])).norm() < 1e-12);
    }

    #[test]
    fn auxiliary_operator_identities() {
        let a = m(3, 4, &[1.0, 0.2, -0.3, 0.0, 0.5, 1.0, 0.1, 0.4, -0.2, 0.3, 1.0, 0.7]);
        let model = FiniteModel::centered(&a * a.transpose() + Matrix::identity(3, 3) * 0.1, "r", &tol()).unwrap();
        let obs = ObservationMap::new(m(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, -1.0])).unwrap();
        let est = ols_build(&model, &obs, &tol()).unwrap();
        let (l, r, k) = (&est.lifted, &est.residual, &model.cov);
        assert!((l * l - l).norm() < 1e-10);
        assert!((r * r - r).norm() < 1e-10);
        assert!((l * r).norm() < 1e-10);
        assert!((l * k * r.transpose()).norm() < 1e-10);
        assert!((l * k * l.transpose() - l * k).norm() < 1e-10);
        assert!((l * k - k * l.transpose()).norm() < 1e-10);
        assert!((r * k * r.transpose() - r * k).norm() < 1e-10);
        assert!((&obs.g * &est.gain - &est.range_projector).norm() < 1e-10);
    }

    #[test]
    fn contravariance_trivial_cases() {
        let (model, obs) = two_dim();
        assert!(contravariance_check(&model, &obs, &ObservationMap::identity(1), &tol()).unwrap() < 1e-14);
        assert!(contravariance_check(&model, &ObservationMap::identity(2), &obs, &tol()).unwrap() < 1e-14);
        assert!(contravariance_check(&model, &obs, &ObservationMap::identity(2), &tol()).is_err());
    }

    #[test]
    fn risk_identity_observation() {
        let (model, _) = two_dim();
        let obs = ObservationMap::identity(2);
        let est = AffineEstimator {
            offset: Vector::zeros(2),
            gain: Matrix::identity(2, 2),
        };
        let f = v(&[0.7, -1.2]);
        let r = risk(&model, &obs, &est, &f, &tol()).unwrap();
        assert!(r.mse.abs() < 1e-14);
        assert!((r.estvar - f.dot(&(&model.cov * &f))).abs() < 1e-14);
    }

    #[test]
    fn ols_is_unbiased_and_contract_checked() {
        let (mut model, obs) = two_dim();
        model.mean = v(&[3.0, -1.0]);
        let est = ols_build(&model, &obs, &tol()).unwrap();
        let r = risk(&model, &obs, &est.as_affine(), &v(&[1.0, 2.0]), &tol()).unwrap();
        assert!(r.bias.abs() < 1e-14);
        let bad = AffineEstimator {
            offset: Vector::zeros(2),
            gain: m(2, 1, &[2.0, 0.0]),
        };
        assert!(matches!(
            risk(&model, &obs, &bad, &v(&[1.0, 2.0]), &tol()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn random_right_inverse_properties() {
        let (model, obs) = two_dim();
        let est = ols_build(&model, &obs, &tol()).unwrap();
        assert_eq!(perturbed_right_inverse(&est, &Matrix::zeros(2, 1)), est.gain);
        let a = random_right_inverse(&est, 1).unwrap();
        let b = random_right_inverse(&est, 2).unwrap();
        assert!((&obs.g * &a - Matrix::identity(1, 1)).norm() < 1e-10);
        assert!((a - b).norm() > 0.0);
        let degenerate = FiniteModel::centered(m(2, 2, &[0.0, 0.0, 0.0, 1.0]), "deg", &tol()).unwrap();
        let est = ols_build(&degenerate, &obs, &tol()).unwrap();
        assert!(matches!(
            random_right_inverse(&est, 0),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn gmt_self_comparison_saturates() {
        let (model, obs) = two_dim();
        let est = ols_build(&model, &obs, &tol()).unwrap();
        let report = gmt_compare(&model, &obs, &v(&[0.4, 1.0]), &[est.as_affine()], &tol()).unwrap();
        let e = &report.entries[0];
        assert!(e.estvar_slack.abs() < 1e-12 && e.mse_slack.abs() < 1e-12);
        assert!(e.adjoint_equal && report.equality_consistent);
    }

    #[test]
    fn estimated_variance_is_not_minimized_by_ols() {
        // G = [1 0], K = I: the right inverse (1, -1)ᵀ explains less variance
        // of f = (1, 1) than OLS while still losing on MSE.
        let model = FiniteModel::centered(Matrix::identity(2, 2), "iso", &tol()).unwrap();
        let obs = ObservationMap::new(m(1, 2, &[1.0, 0.0])).unwrap();
        let alt = AffineEstimator::centered(&model, &obs, m(2, 1, &[1.0, -1.0])).unwrap();
        let report = gmt_compare(&model, &obs, &v(&[1.0, 1.0]), &[alt], &tol()).unwrap();
        assert!((report.ols.estvar - 1.0).abs() < 1e-14);
        assert!(report.entries[0].estvar.abs() < 1e-14);
        assert!(!report.estvar_all_hold);
        assert!(report.mse_all_hold);
        assert!((report.entries[0].mse_slack - 1.0).abs() < 1e-14);
    }

    #[test]
    fn operator_norm_scale_invariant() {
        let (model, obs) = two_dim();
        let base = operator_norm(&ols_build(&model, &obs, &tol()).unwrap()).unwrap();
        for c in [0.1, 10.0] {
            let scaled = operator_norm(&ols_build(&model.scaled(c), &obs, &tol()).unwrap()).unwrap();
            assert!((scaled - base).abs() <= 1e-12 * base);
        }
    }

    #[test]
    fn delta_zero_for_same_model() {
        let (model, obs) = two_dim();
        assert_eq!(delta_norm(&model, &model, &obs, &tol()).unwrap(), 0.0);
        assert_eq!(delta_ratio(&model, &model, &obs, &tol()).unwrap(), (0.0, 0));
    }

    #[test]
    fn delta_ratio_does_not_vanish() {
        let (model, obs) = two_dim();
        let bump = m(2, 2, &[1.0, 0.5, 0.5, 0.3]);
        let mut last: Option<f64> = None;
        for eps in [1e-1, 1e-3, 1e-6] {
            let other = FiniteModel::centered(&model.cov + &bump * eps, "b", &tol()).unwrap();
            let (ratio, _) = delta_ratio(&model, &other, &obs, &tol()).unwrap();
            if let Some(prev) = last {
                assert!((ratio - prev).abs() < 1e-6);
            }
            last = Some(ratio);
            assert!(delta_norm(&model, &other, &obs, &tol()).unwrap() < eps);
        }
    }

    #[test]
    fn paley_wiener_cases() {
        let model = FiniteModel::new(v(&[1.0, 2.0]), m(2, 2, &[1.0, 1.0, 1.0, 1.0]), "line", &tol()).unwrap();
        assert_eq!(
            paley_wiener(&model, &Vector::zeros(2), &v(&[5.0, 1.0]), &tol()).unwrap(),
            0.0
        );
        assert_eq!(paley_wiener(&model, &v(&[1.0, 1.0]), &model.mean, &tol()).unwrap(), 0.0);
        assert!(matches!(
            paley_wiener(&model, &v(&[1.0, 0.0]), &model.mean, &tol()),
            Err(Error::OutsideRange { .. })
        ));
    }

    #[test]
    fn sampling_degenerate_and_deterministic() {
        let model = FiniteModel::new(v(&[1.0, -1.0]), Matrix::zeros(2, 2), "pt", &tol()).unwrap();
        assert!(sample(&model, 3, 100, &tol()).unwrap().iter().all(|s| *s == model.mean));
        let (model, _) = two_dim();
        assert_eq!(
            sample(&model, 4, 5000, &tol()).unwrap(),
            sample(&model, 4, 5000, &tol()).unwrap()
        );
    }
}
