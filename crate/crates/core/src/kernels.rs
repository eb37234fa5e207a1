//! Covariance kernels over finite index sets, co-arrays, the covariance
//! metric and covering-number entropy estimates.
//!
//! Matrix-valued kernels use the separable (intrinsic coregionalization) form
//! `c(i, i') = B * c_scalar(i, i')` with a PSD coregionalization matrix `B`.
//! Other matrix-valued kernels plug in through [`CovarianceKernel`].

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Tolerance, Vector};

/// A point of the (discretized) index space, realized as a point of `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexPoint(pub Vec<f64>);

impl IndexPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        IndexPoint(coords)
    }

    pub fn scalar(x: f64) -> Self {
        IndexPoint(vec![x])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn lex_cmp(&self, other: &IndexPoint) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.0.len().cmp(&other.0.len())
    }

    fn dist2(&self, other: &IndexPoint) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    fn dot(&self, other: &IndexPoint) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }
}

impl fmt::Display for IndexPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, x) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelFamily {
    SquaredExponential,
    Matern12,
    Matern32,
    Matern52,
    Linear,
    Polynomial { degree: u32 },
    Wendland { support_radius: f64 },
}

impl KernelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::SquaredExponential => "se",
            KernelFamily::Matern12 => "matern-1/2",
            KernelFamily::Matern32 => "matern-3/2",
            KernelFamily::Matern52 => "matern-5/2",
            KernelFamily::Linear => "linear",
            KernelFamily::Polynomial { .. } => "polynomial",
            KernelFamily::Wendland { .. } => "wendland",
        }
    }

    pub fn is_stationary(&self) -> bool {
        !matches!(self, KernelFamily::Linear | KernelFamily::Polynomial { .. })
    }
}

/// Parametrized covariance kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKernelSpec", into = "RawKernelSpec")]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub lengthscale: f64,
    pub variance: f64,
    /// Coregionalization matrix `B` (`q x q`); `[[1]]` for scalar kernels.
    pub coregionalization: Matrix,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, lengthscale: f64, variance: f64) -> Result<Self> {
        let spec = KernelSpec {
            family,
            lengthscale,
            variance,
            coregionalization: Matrix::identity(1, 1),
        };
        spec.validate()
            .map_err(|(field, msg)| Error::InvalidInput(format!("{field}: {msg}")))?;
        Ok(spec)
    }

    pub fn se(lengthscale: f64, variance: f64) -> Self {
        KernelSpec::new(KernelFamily::SquaredExponential, lengthscale, variance)
            .expect("valid squared-exponential parameters")
    }

    pub fn with_coregionalization(mut self, b: Matrix) -> Result<Self> {
        self.coregionalization = b;
        self.validate()
            .map_err(|(field, msg)| Error::InvalidInput(format!("{field}: {msg}")))?;
        Ok(self)
    }

    pub fn with_lengthscale(&self, lengthscale: f64) -> Self {
        KernelSpec {
            lengthscale,
            ..self.clone()
        }
    }

    pub fn output_dim(&self) -> usize {
        self.coregionalization.nrows()
    }

    /// Check parameter constraints; on failure returns the offending field
    /// name and a message.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        if !(self.lengthscale.is_finite() && self.lengthscale > 0.0) {
            return Err(("lengthscale", format!("must be > 0, got {}", self.lengthscale)));
        }
        if !(self.variance.is_finite() && self.variance > 0.0) {
            return Err(("variance", format!("must be > 0, got {}", self.variance)));
        }
        match self.family {
            KernelFamily::Polynomial { degree: 0 } => {
                return Err(("degree", "must be >= 1".into()));
            }
            KernelFamily::Wendland { support_radius } if !(support_radius.is_finite() && support_radius > 0.0) => {
                return Err(("support_radius", format!("must be > 0, got {support_radius}")));
            }
            _ => {}
        }
        let b = &self.coregionalization;
        if b.nrows() == 0 || b.nrows() != b.ncols() {
            return Err(("coregionalization", "must be a nonempty square matrix".into()));
        }
        if linalg::psd_factor(b, &Tolerance::default()).is_err() {
            return Err(("coregionalization", "must be symmetric positive semidefinite".into()));
        }
        Ok(())
    }

    /// The scalar kernel `c_scalar(a, b)` including the variance.
    pub fn scalar(&self, a: &IndexPoint, b: &IndexPoint) -> f64 {
        let s2 = self.variance;
        let l = self.lengthscale;
        match self.family {
            KernelFamily::SquaredExponential => s2 * (-a.dist2(b) / (2.0 * l * l)).exp(),
            KernelFamily::Matern12 => s2 * (-a.dist2(b).sqrt() / l).exp(),
            KernelFamily::Matern32 => {
                let z = 3f64.sqrt() * a.dist2(b).sqrt() / l;
                s2 * (1.0 + z) * (-z).exp()
            }
            KernelFamily::Matern52 => {
                let z = 5f64.sqrt() * a.dist2(b).sqrt() / l;
                s2 * (1.0 + z + z * z / 3.0) * (-z).exp()
            }
            KernelFamily::Linear => s2 * a.dot(b) / (l * l),
            KernelFamily::Polynomial { degree } => s2 * (a.dot(b) / (l * l) + 1.0).powi(degree as i32),
            KernelFamily::Wendland { support_radius } => {
                let s = a.dist2(b).sqrt() / support_radius;
                if s >= 1.0 {
                    0.0
                } else {
                    s2 * (1.0 - s).powi(4) * (4.0 * s + 1.0)
                }
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKernelSpec {
    family: String,
    lengthscale: f64,
    variance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    degree: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    support_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coregionalization: Option<Vec<Vec<f64>>>,
}

impl TryFrom<RawKernelSpec> for KernelSpec {
    type Error = String;

    fn try_from(raw: RawKernelSpec) -> std::result::Result<Self, String> {
        let family = match raw.family.to_ascii_lowercase().as_str() {
            "se" | "squared-exponential" | "rbf" => KernelFamily::SquaredExponential,
            "matern-1/2" | "matern12" | "exponential" => KernelFamily::Matern12,
            "matern-3/2" | "matern32" => KernelFamily::Matern32,
            "matern-5/2" | "matern52" => KernelFamily::Matern52,
            "linear" => KernelFamily::Linear,
            "polynomial" => KernelFamily::Polynomial {
                degree: raw
                    .degree
                    .ok_or("kernel.degree is required for the polynomial family")?,
            },
            "wendland" | "wendland-compact" => KernelFamily::Wendland {
                support_radius: raw
                    .support_radius
                    .ok_or("kernel.support_radius is required for the wendland family")?,
            },
            other => return Err(format!("kernel.family: unknown kernel family `{other}`")),
        };
        let coregionalization = match (raw.coregionalization, raw.output_dim) {
            (Some(rows), q) => {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err("kernel.coregionalization: must be a square matrix".into());
                }
                if let Some(q) = q {
                    if q != n {
                        return Err(format!(
                            "kernel.output_dim: {q} does not match coregionalization size {n}"
                        ));
                    }
                }
                Matrix::from_fn(n, n, |i, j| rows[i][j])
            }
            (None, Some(q)) if q >= 1 => Matrix::identity(q, q),
            (None, Some(_)) => return Err("kernel.output_dim: must be >= 1".into()),
            (None, None) => Matrix::identity(1, 1),
        };
        let spec = KernelSpec {
            family,
            lengthscale: raw.lengthscale,
            variance: raw.variance,
            coregionalization,
        };
        spec.validate()
            .map_err(|(field, msg)| format!("kernel.{field}: {msg}"))?;
        Ok(spec)
    }
}

impl From<KernelSpec> for RawKernelSpec {
    fn from(spec: KernelSpec) -> Self {
        let q = spec.output_dim();
        let (degree, support_radius) = match spec.family {
            KernelFamily::Polynomial { degree } => (Some(degree), None),
            KernelFamily::Wendland { support_radius } => (None, Some(support_radius)),
            _ => (None, None),
        };
        let b = &spec.coregionalization;
        RawKernelSpec {
            family: spec.family.name().to_string(),
            lengthscale: spec.lengthscale,
            variance: spec.variance,
            degree,
            support_radius,
            output_dim: Some(q),
            coregionalization: Some((0..q).map(|i| (0..q).map(|j| b[(i, j)]).collect()).collect()),
        }
    }
}

/// A (possibly matrix-valued) covariance kernel `c(i, i')`.
///
/// Implementors must return `q x q` blocks with `c(i, i') = c(i', i)ᵀ` and
/// `c(i, i)` PSD, and must yield PSD Gram matrices.
pub trait CovarianceKernel: Send + Sync {
    fn output_dim(&self) -> usize;

    fn eval(&self, a: &IndexPoint, b: &IndexPoint) -> Result<Matrix>;
}

impl CovarianceKernel for KernelSpec {
    fn output_dim(&self) -> usize {
        KernelSpec::output_dim(self)
    }

    fn eval(&self, a: &IndexPoint, b: &IndexPoint) -> Result<Matrix> {
        kernel_eval(self, a, b)
    }
}

/// Evaluate the `q x q` covariance block between two index points.
pub fn kernel_eval(spec: &KernelSpec, a: &IndexPoint, b: &IndexPoint) -> Result<Matrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "index points of dimension {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(&spec.coregionalization * spec.scalar(a, b))
}

/// Gram matrix with `q x q` blocks, point-major ordering (row `a*q + r`).
pub fn gram<K: CovarianceKernel + ?Sized>(kernel: &K, points: &[IndexPoint]) -> Result<Matrix> {
    if points.is_empty() {
        return Err(Error::InvalidInput("gram needs at least one point".into()));
    }
    let d = points[0].dim();
    if let Some(p) = points.iter().find(|p| p.dim() != d) {
        return Err(Error::DimensionMismatch(format!(
            "point {p} does not have dimension {d}"
        )));
    }
    let q = kernel.output_dim();
    let n = points.len();
    let mut g = Matrix::zeros(n * q, n * q);
    for a in 0..n {
        for b in a..n {
            let block = kernel.eval(&points[a], &points[b])?;
            if block.shape() != (q, q) {
                return Err(Error::DimensionMismatch(format!(
                    "kernel returned a {:?} block, expected {q}x{q}",
                    block.shape()
                )));
            }
            g.view_mut((a * q, b * q), (q, q)).copy_from(&block);
            if a != b {
                g.view_mut((b * q, a * q), (q, q)).copy_from(&block.transpose());
            }
        }
    }
    Ok(g)
}

/// Cross-covariance between two point lists: block `(a, b)` is `c(rows[a], cols[b])`.
pub fn cross_gram<K: CovarianceKernel + ?Sized>(
    kernel: &K,
    rows: &[IndexPoint],
    cols: &[IndexPoint],
) -> Result<Matrix> {
    let q = kernel.output_dim();
    let mut g = Matrix::zeros(rows.len() * q, cols.len() * q);
    for (a, pa) in rows.iter().enumerate() {
        for (b, pb) in cols.iter().enumerate() {
            g.view_mut((a * q, b * q), (q, q)).copy_from(&kernel.eval(pa, pb)?);
        }
    }
    Ok(g)
}

/// Finitely supported co-array: a weighted sum of Dirac masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoArray {
    pub masses: Vec<(Vector, IndexPoint)>,
}

impl CoArray {
    pub fn new(masses: Vec<(Vector, IndexPoint)>) -> Result<Self> {
        if let Some((_, first)) = masses.first() {
            let d = first.dim();
            if masses.iter().any(|(_, p)| p.dim() != d) {
                return Err(Error::DimensionMismatch(
                    "co-array points must share a dimension".into(),
                ));
            }
        }
        Ok(CoArray { masses })
    }

    /// Scalar Dirac mass `δ_i`.
    pub fn dirac(point: IndexPoint) -> Self {
        CoArray {
            masses: vec![(Vector::from_element(1, 1.0), point)],
        }
    }

    /// Extended point mass `e·δ_i` with co-value `e`.
    pub fn extended_dirac(covalue: Vector, point: IndexPoint) -> Self {
        CoArray {
            masses: vec![(covalue, point)],
        }
    }

    pub fn zero(point: IndexPoint, q: usize) -> Self {
        CoArray {
            masses: vec![(Vector::zeros(q), point)],
        }
    }
}

/// Points with optional `q`-dimensional values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedDataset {
    pub points: Vec<IndexPoint>,
    pub values: Option<Vec<Vector>>,
}

impl IndexedDataset {
    pub fn new(points: Vec<IndexPoint>, values: Option<Vec<Vector>>) -> Result<Self> {
        if let Some(v) = &values {
            if v.len() != points.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} points but {} values",
                    points.len(),
                    v.len()
                )));
            }
            if v.iter().any(|x| x.iter().any(|e| e.is_nan())) {
                return Err(Error::InvalidInput("dataset values contain NaN".into()));
            }
        }
        if points.iter().any(|p| p.0.iter().any(|e| e.is_nan())) {
            return Err(Error::InvalidInput("dataset points contain NaN".into()));
        }
        Ok(IndexedDataset { points, values })
    }

    pub fn position(&self, point: &IndexPoint) -> Option<usize> {
        self.points.iter().position(|p| p == point)
    }
}

/// `φ[a] = Σ_k e_k · a(i_k)`, with exact coordinate lookup of each point.
pub fn coarray_apply(phi: &CoArray, data: &IndexedDataset) -> Result<f64> {
    let values = data
        .values
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("dataset has no values".into()))?;
    let mut total = 0.0;
    for (w, p) in &phi.masses {
        let idx = data.position(p).ok_or_else(|| Error::MissingPoint(p.to_string()))?;
        let v = &values[idx];
        if v.len() != w.len() {
            return Err(Error::DimensionMismatch(format!(
                "co-value of length {} against value of length {}",
                w.len(),
                v.len()
            )));
        }
        total += w.dot(v);
    }
    Ok(total)
}

/// Covariance of `φ[a]` and `ψ[a]`: `Σ_k Σ_l φ_kᵀ c(i_k, i_l) ψ_l`.
pub fn coarray_cov<K: CovarianceKernel + ?Sized>(kernel: &K, phi: &CoArray, psi: &CoArray) -> Result<f64> {
    let q = kernel.output_dim();
    let mut total = 0.0;
    for (e, i) in &phi.masses {
        for (f, j) in &psi.masses {
            if e.len() != q || f.len() != q {
                return Err(Error::DimensionMismatch(format!("co-values must have length {q}")));
            }
            let c = kernel.eval(i, j)?;
            total += e.dot(&(c * f));
        }
    }
    Ok(total)
}

/// Covariance (pseudo-)metric, squared form:
/// `t = c(e,i;e,i) - 2 c(e,i;e',i') + c(e',i';e',i')`.
pub fn covariance_metric<K: CovarianceKernel + ?Sized>(
    kernel: &K,
    a: (&Vector, &IndexPoint),
    b: (&Vector, &IndexPoint),
) -> Result<f64> {
    if a.0 == b.0 && a.1 == b.1 {
        return Ok(0.0);
    }
    let cov = |x: (&Vector, &IndexPoint), y: (&Vector, &IndexPoint)| -> Result<f64> {
        Ok(x.0.dot(&(kernel.eval(x.1, y.1)? * y.0)))
    };
    Ok(cov(a, a)? - 2.0 * cov(a, b)? + cov(b, b)?)
}

/// Distance `√t_c` between scalar point evaluations (unit co-values).
pub fn covariance_distance<K: CovarianceKernel + ?Sized>(kernel: &K, a: &IndexPoint, b: &IndexPoint) -> Result<f64> {
    let q = kernel.output_dim();
    if q != 1 {
        return Err(Error::DimensionMismatch(format!(
            "scalar covariance distance needs q = 1, kernel has q = {q}"
        )));
    }
    let e = Vector::from_element(1, 1.0);
    Ok(covariance_metric(kernel, (&e, a), (&e, b))?.max(0.0).sqrt())
}

/// Farthest-first traversal under a distance matrix.
///
/// Starts at the lexicographically smallest point; ties go to the lowest
/// index. `radii[k]` is the covering radius of the first `k + 1` centres.
#[derive(Debug, Clone, PartialEq)]
pub struct FarthestFirst {
    pub order: Vec<usize>,
    pub radii: Vec<f64>,
}

impl FarthestFirst {
    pub fn from_distances(points: &[IndexPoint], dist: &Matrix) -> Self {
        let n = points.len();
        let start = (0..n)
            .min_by(|&a, &b| points[a].lex_cmp(&points[b]).then(a.cmp(&b)))
            .expect("nonempty point set");
        let mut order = vec![start];
        let mut nearest: Vec<f64> = (0..n).map(|j| dist[(start, j)]).collect();
        let mut radii = Vec::with_capacity(n);
        loop {
            let (far, r) =
                nearest.iter().enumerate().fold(
                    (0, f64::NEG_INFINITY),
                    |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) },
                );
            radii.push(r.max(0.0));
            if r <= 0.0 || order.len() == n {
                break;
            }
            order.push(far);
            for j in 0..n {
                nearest[j] = nearest[j].min(dist[(far, j)]);
            }
        }
        FarthestFirst { order, radii }
    }

    /// Number of greedy centres needed for closed `ε`-balls to cover.
    pub fn count(&self, eps: f64) -> usize {
        self.radii
            .iter()
            .position(|&r| r <= eps)
            .map(|k| k + 1)
            .unwrap_or(self.radii.len())
    }
}

pub fn distance_matrix<K: CovarianceKernel + ?Sized>(kernel: &K, points: &[IndexPoint]) -> Result<Matrix> {
    let n = points.len();
    let mut d = Matrix::zeros(n, n);
    for a in 0..n {
        for b in (a + 1)..n {
            let v = covariance_distance(kernel, &points[a], &points[b])?;
            d[(a, b)] = v;
            d[(b, a)] = v;
        }
    }
    Ok(d)
}

pub fn diameter<K: CovarianceKernel + ?Sized>(kernel: &K, points: &[IndexPoint]) -> Result<f64> {
    Ok(distance_matrix(kernel, points)?.iter().cloned().fold(0.0, f64::max))
}

/// Greedy farthest-point estimate of the covering number `N_D(ε)` under `√t_c`.
pub fn covering_number<K: CovarianceKernel + ?Sized>(kernel: &K, points: &[IndexPoint], eps: f64) -> Result<usize> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidInput(format!("epsilon must be > 0, got {eps}")));
    }
    if points.is_empty() {
        return Err(Error::InvalidInput("covering_number needs a nonempty point set".into()));
    }
    let dist = distance_matrix(kernel, points)?;
    Ok(FarthestFirst::from_distances(points, &dist).count(eps))
}

/// Default grid: 64 log-spaced values from `1e-3·diam` to `diam`.
pub fn default_entropy_grid(diam: f64) -> Vec<f64> {
    log_grid(if diam > 0.0 { diam } else { 1.0 }, 64)
}

pub fn log_grid(diam: f64, n: usize) -> Vec<f64> {
    let lo = (1e-3 * diam).ln();
    let hi = diam.ln();
    (0..n)
        .map(|k| (lo + (hi - lo) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Entropy profile over a grid, with the trapezoidal integral of `log N(ε)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyProfile {
    pub grid: Vec<f64>,
    pub counts: Vec<usize>,
    pub integral: f64,
}

pub fn entropy_profile<K: CovarianceKernel + ?Sized>(
    kernel: &K,
    points: &[IndexPoint],
    grid: &[f64],
) -> Result<EntropyProfile> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("grid is empty".into()));
    }
    if grid.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::InvalidGrid("grid values must be finite and positive".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    if points.is_empty() {
        return Err(Error::InvalidInput("entropy needs a nonempty point set".into()));
    }
    let dist = distance_matrix(kernel, points)?;
    let ff = FarthestFirst::from_distances(points, &dist);
    let counts: Vec<usize> = grid.iter().map(|&e| ff.count(e)).collect();
    let stop = counts.iter().position(|&c| c == 1).unwrap_or(grid.len() - 1);
    let integral = (0..stop)
        .map(|k| 0.5 * ((counts[k] as f64).ln() + (counts[k + 1] as f64).ln()) * (grid[k + 1] - grid[k]))
        .sum();
    Ok(EntropyProfile {
        grid: grid.to_vec(),
        counts,
        integral,
    })
}

/// Trapezoidal estimate of `∫ log N_D(ε) dε`, truncated at the first `ε`
/// with `N = 1`.
pub fn entropy_integral<K: CovarianceKernel + ?Sized>(kernel: &K, points: &[IndexPoint], grid: &[f64]) -> Result<f64> {
    Ok(entropy_profile(kernel, points, grid)?.integral)
}
