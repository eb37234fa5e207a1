//! Array spaces over finite index sets, observation maps built from
//! index maps, OLS kriging and the fuzzy classifier.
//!
//! An array `a: I -> R^q` on `n` index points is stored point-major as a
//! vector of length `n q`, entry `k q + r` holding component `r` at point `k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{self, IndexPoint, KernelSpec};
use crate::linalg::{self, Matrix, Tolerance, Vector};
use crate::model::{self, FiniteModel, ObservationMap, OlsEstimator};

/// Prior mean of a design.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeanFunction {
    #[default]
    Zero,
    Constant {
        value: Vec<f64>,
    },
    /// One value per design point.
    Values {
        values: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayDesign {
    pub points: Vec<IndexPoint>,
    pub kernel: KernelSpec,
    pub mean: MeanFunction,
}

impl ArrayDesign {
    pub fn new(points: Vec<IndexPoint>, kernel: KernelSpec) -> Result<Self> {
        let design = ArrayDesign {
            points,
            kernel,
            mean: MeanFunction::Zero,
        };
        design.validate()?;
        Ok(design)
    }

    pub fn with_mean(mut self, mean: MeanFunction) -> Result<Self> {
        self.mean = mean;
        self.validate()?;
        Ok(self)
    }

    pub fn with_mean_fn(self, f: impl Fn(&IndexPoint) -> Vector) -> Result<Self> {
        let values = self.points.iter().map(|p| f(p).iter().cloned().collect()).collect();
        self.with_mean(MeanFunction::Values { values })
    }

    pub fn validate(&self) -> Result<()> {
        let d = self
            .points
            .first()
            .map(IndexPoint::dim)
            .ok_or_else(|| Error::InvalidInput("design needs at least one index point".into()))?;
        if self.points.iter().any(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch("index points of different dimension".into()));
        }
        if self.points.iter().any(|p| p.0.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidInput("index points must be finite".into()));
        }
        let mut sorted: Vec<&IndexPoint> = self.points.iter().collect();
        sorted.sort_by(|a, b| a.lex_cmp(b));
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput(format!("duplicate index point {}", w[0])));
        }
        self.kernel
            .validate()
            .map_err(|(field, msg)| Error::InvalidInput(format!("kernel.{field}: {msg}")))?;
        let q = self.q();
        let bad = match &self.mean {
            MeanFunction::Zero => false,
            MeanFunction::Constant { value } => value.len() != q,
            MeanFunction::Values { values } => values.len() != self.points.len() || values.iter().any(|v| v.len() != q),
        };
        if bad {
            return Err(Error::DimensionMismatch(format!(
                "mean function does not match {} points with {q} outputs",
                self.points.len()
            )));
        }
        Ok(())
    }

    pub fn q(&self) -> usize {
        self.kernel.output_dim()
    }

    /// Dimension `n q` of the array space.
    pub fn dim(&self) -> usize {
        self.points.len() * self.q()
    }

    pub fn position(&self, point: &IndexPoint) -> Option<usize> {
        self.points.iter().position(|p| p == point)
    }

    pub fn mean_vector(&self) -> Vector {
        let q = self.q();
        match &self.mean {
            MeanFunction::Zero => Vector::zeros(self.dim()),
            MeanFunction::Constant { value } => Vector::from_fn(self.dim(), |k, _| value[k % q]),
            MeanFunction::Values { values } => Vector::from_fn(self.dim(), |k, _| values[k / q][k % q]),
        }
    }
}

/// `n` evenly spaced points on `[lo, hi]`.
pub fn grid_1d(lo: f64, hi: f64, n: usize) -> Vec<IndexPoint> {
    match n {
        0 => Vec::new(),
        1 => vec![IndexPoint::scalar(lo)],
        _ => (0..n)
            .map(|k| IndexPoint::scalar(lo + (hi - lo) * k as f64 / (n - 1) as f64))
            .collect(),
    }
}

/// Tensor grid of `grid_1d(lo, hi, n)` with itself, row-major in the first coordinate.
pub fn grid_2d(lo: f64, hi: f64, n: usize) -> Vec<IndexPoint> {
    let axis = grid_1d(lo, hi, n);
    axis.iter()
        .flat_map(|a| axis.iter().map(move |b| IndexPoint::new(vec![a.0[0], b.0[0]])))
        .collect()
}

/// Index map `D -> I` given by target points, and a value map `w: R^q -> R^q'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    pub targets: Vec<IndexPoint>,
    pub value_map: Matrix,
}

pub fn model_from_design(design: &ArrayDesign) -> Result<FiniteModel> {
    design.validate()?;
    let cov = kernels::gram(&design.kernel, &design.points)?;
    FiniteModel::new(design.mean_vector(), cov, "array design", &Tolerance::default())
}

/// Observation of the array at the design points with the given indices.
pub fn restriction_map(design: &ArrayDesign, subset: &[usize]) -> Result<ObservationMap> {
    let n = design.points.len();
    if let Some(&bad) = subset.iter().find(|&&k| k >= n) {
        return Err(Error::InvalidInput(format!(
            "subset index {bad} out of range for {n} points"
        )));
    }
    let mut seen = vec![false; n];
    for &k in subset {
        if std::mem::replace(&mut seen[k], true) {
            return Err(Error::InvalidInput(format!("subset index {k} repeated")));
        }
    }
    let q = design.q();
    let mut g = Matrix::zeros(subset.len() * q, n * q);
    for (row, &k) in subset.iter().enumerate() {
        for r in 0..q {
            g[(row * q + r, k * q + r)] = 1.0;
        }
    }
    Ok(ObservationMap { g })
}

/// `Υ(a)(d) = w(a(i(d)))`: block `w` at the column block of each target.
pub fn transform_map(design: &ArrayDesign, spec: &TransformSpec) -> Result<ObservationMap> {
    let q = design.q();
    let w = &spec.value_map;
    if w.ncols() != q {
        return Err(Error::DimensionMismatch(format!(
            "value map has {} columns for {q}-dimensional values",
            w.ncols()
        )));
    }
    linalg::ensure_finite(w, "value map")?;
    let qp = w.nrows();
    let mut g = Matrix::zeros(spec.targets.len() * qp, design.dim());
    for (row, t) in spec.targets.iter().enumerate() {
        let k = design
            .position(t)
            .ok_or_else(|| Error::MissingPoint(format!("transform target {t} is not a design point")))?;
        g.view_mut((row * qp, k * q), (qp, q)).copy_from(w);
    }
    Ok(ObservationMap { g })
}

/// Jitter scale relative to the kernel variance.
pub const JITTER_SCALE: f64 = 1e-10;
/// Observed-block condition number above which jitter is applied.
pub const JITTER_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KrigeResult {
    /// Predicted values, one per design point.
    pub predictions: Vec<Vector>,
    /// Diagonal jitter added to the observed Gram block (zero when none).
    pub jitter: f64,
    pub condition_number: f64,
}

impl KrigeResult {
    pub fn flat(&self) -> Vector {
        Vector::from_iterator(
            self.predictions.iter().map(Vector::len).sum(),
            self.predictions.iter().flat_map(|v| v.iter().cloned()),
        )
    }
}

/// Model, restriction map and OLS estimator behind `krige`, without jitter.
pub fn kriging_estimator(
    design: &ArrayDesign,
    observed: &[usize],
    tol: &Tolerance,
) -> Result<(FiniteModel, ObservationMap, OlsEstimator)> {
    let model = model_from_design(design)?;
    let obs = restriction_map(design, observed)?;
    let est = model::ols_build(&model, &obs, tol)?;
    Ok((model, obs, est))
}

/// OLS prediction of the whole array from values observed at `observed`.
pub fn krige(design: &ArrayDesign, observed: &[usize], values: &[Vector]) -> Result<KrigeResult> {
    krige_with(design, observed, values, &Tolerance::default())
}

pub fn krige_with(design: &ArrayDesign, observed: &[usize], values: &[Vector], tol: &Tolerance) -> Result<KrigeResult> {
    let q = design.q();
    if values.len() != observed.len() || values.iter().any(|v| v.len() != q) {
        return Err(Error::DimensionMismatch(format!(
            "{} observed points need {} values of dimension {q}",
            observed.len(),
            observed.len()
        )));
    }
    let y = Vector::from_iterator(observed.len() * q, values.iter().flat_map(|v| v.iter().cloned()));
    let (model, obs, est) = kriging_estimator(design, observed, tol)?;
    let (residual, allowed) = est.support_residual(&y)?;
    if residual > allowed {
        return Err(Error::SupportViolation { residual, allowed });
    }
    let s = linalg::symmetrize(&(&obs.g * &model.cov * obs.g.transpose()));
    let condition_number = linalg::condition_number(&s)?;
    let (flat, jitter) = if observed.is_empty() || condition_number <= JITTER_CONDITION {
        (est.estimate(&y)?, 0.0)
    } else {
        let jitter = JITTER_SCALE * design.kernel.variance * design.kernel.coregionalization.diagonal().max();
        let n = s.nrows();
        let inv = linalg::pinv(&(s + Matrix::identity(n, n) * jitter), tol)?;
        let gain = &model.cov * obs.g.transpose() * inv;
        (&model.mean + gain * (&y - &est.obs_mean), jitter)
    };
    Ok(KrigeResult {
        predictions: split(&flat, q),
        jitter,
        condition_number,
    })
}

fn split(flat: &Vector, q: usize) -> Vec<Vector> {
    flat.as_slice().chunks(q).map(Vector::from_column_slice).collect()
}

/// Prior mean used by the fuzzy classifier.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FuzzyPrior {
    /// Constant `1/2`, equidistant from both labels.
    #[default]
    Half,
    Zero,
}

impl FuzzyPrior {
    pub fn value(self) -> f64 {
        match self {
            FuzzyPrior::Half => 0.5,
            FuzzyPrior::Zero => 0.0,
        }
    }
}

/// Krige the indicator data `0` on `d0`, `1` on `d1`; scalar designs only.
pub fn fuzzy_classify(design: &ArrayDesign, d0: &[usize], d1: &[usize], prior: FuzzyPrior) -> Result<Vec<f64>> {
    fuzzy_classify_with(design, d0, d1, prior, &Tolerance::default())
}

pub fn fuzzy_classify_with(
    design: &ArrayDesign,
    d0: &[usize],
    d1: &[usize],
    prior: FuzzyPrior,
    tol: &Tolerance,
) -> Result<Vec<f64>> {
    if design.q() != 1 {
        return Err(Error::InvalidInput("fuzzy classification needs a scalar kernel".into()));
    }
    if d0.is_empty() || d1.is_empty() {
        return Err(Error::InvalidInput("both labelled sets must be nonempty".into()));
    }
    if let Some(k) = d0.iter().find(|k| d1.contains(k)) {
        let p = design
            .points
            .get(*k)
            .map(ToString::to_string)
            .unwrap_or_else(|| k.to_string());
        return Err(Error::OverlappingSets(format!("point {p} carries both labels")));
    }
    let labelled = design.clone().with_mean(MeanFunction::Constant {
        value: vec![prior.value()],
    })?;
    let observed: Vec<usize> = d0.iter().chain(d1).cloned().collect();
    let values: Vec<Vector> = d0
        .iter()
        .map(|_| Vector::from_element(1, 0.0))
        .chain(d1.iter().map(|_| Vector::from_element(1, 1.0)))
        .collect();
    Ok(krige_with(&labelled, &observed, &values, tol)?
        .predictions
        .iter()
        .map(|v| v[0])
        .collect())
}
