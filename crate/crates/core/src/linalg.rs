//! Dense linear-algebra kernel shared by every other module.
//!
//! All routines are pure functions of their inputs. Singular-value
//! decompositions are the canonical route for pseudoinverses, projectors and
//! spectral norms; the symmetric eigendecomposition backs PSD factorization.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Numerical cutoffs used for rank decisions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerance {
    /// Relative singular-value cutoff.
    pub rcond: f64,
    /// Eigenvalue clipping bound for PSD checks.
    pub abs_psd: f64,
    /// Relative residual allowed when checking data against the affine support.
    pub support: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rcond: 1e-12,
            abs_psd: 1e-10,
            support: 1e-8,
        }
    }
}

impl Tolerance {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rcond", self.rcond),
            ("abs_psd", self.abs_psd),
            ("support", self.support),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidInput(format!(
                    "tolerance {name} must lie in (0, 1), got {v}"
                )));
            }
        }
        Ok(())
    }
}

pub fn ensure_finite(a: &Matrix, what: &str) -> Result<()> {
    if a.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} has non-finite entries")))
    }
}

pub fn ensure_finite_vec(v: &Vector, what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} has non-finite entries")))
    }
}

pub fn symmetrize(a: &Matrix) -> Matrix {
    (a + a.transpose()) * 0.5
}

fn max_abs(a: &Matrix) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Thin singular-value decomposition `A = U diag(s) Vᵀ` with `s` descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub v: Matrix,
}

impl Svd {
    /// One-sided Jacobi (Hestenes) SVD. Columns are rotated pairwise until
    /// mutually orthogonal; singular values come out to high relative accuracy.
    pub fn new(a: &Matrix) -> Svd {
        let (rows, cols) = a.shape();
        if rows < cols {
            let t = Svd::new(&a.transpose());
            return Svd {
                u: t.v,
                singular_values: t.singular_values,
                v: t.u,
            };
        }
        let mut w = a.clone();
        let mut v = Matrix::identity(cols, cols);
        for _sweep in 0..80 {
            let mut rotated = false;
            for p in 0..cols {
                for q in (p + 1)..cols {
                    let alpha = w.column(p).norm_squared();
                    let beta = w.column(q).norm_squared();
                    let gamma = w.column(p).dot(&w.column(q));
                    if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    rotate_columns(&mut w, p, q, c, s);
                    rotate_columns(&mut v, p, q, c, s);
                }
            }
            if !rotated {
                break;
            }
        }
        let norms: Vec<f64> = (0..cols).map(|j| w.column(j).norm()).collect();
        let mut order: Vec<usize> = (0..cols).collect();
        order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));
        let mut u = Matrix::zeros(rows, cols);
        let mut vs = Matrix::zeros(cols, cols);
        let mut s = Vec::with_capacity(cols);
        for (k, &j) in order.iter().enumerate() {
            let sigma = norms[j];
            if sigma > 0.0 {
                u.set_column(k, &(w.column(j) / sigma));
            }
            vs.set_column(k, &v.column(j));
            s.push(sigma);
        }
        Svd {
            u,
            singular_values: s,
            v: vs,
        }
    }

    /// Number of singular values above `rcond * sigma_max * max(rows, cols)`.
    pub fn rank(&self, tol: &Tolerance) -> usize {
        let smax = self.singular_values.first().copied().unwrap_or(0.0);
        let cutoff = tol.rcond * smax * self.u.nrows().max(self.v.nrows()) as f64;
        self.singular_values.iter().filter(|&&s| s > cutoff && s > 0.0).count()
    }
}

fn rotate_columns(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..m.nrows() {
        let a = m[(i, p)];
        let b = m[(i, q)];
        m[(i, p)] = c * a - s * b;
        m[(i, q)] = s * a + c * b;
    }
}

/// Moore-Penrose pseudoinverse.
///
/// Singular values at or below `rcond * sigma_max * max(rows, cols)` are
/// treated as zero. `pinv(0) = 0`, including for empty shapes.
pub fn pinv(a: &Matrix, tol: &Tolerance) -> Result<Matrix> {
    ensure_finite(a, "pinv input")?;
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 || max_abs(a) == 0.0 {
        return Ok(Matrix::zeros(cols, rows));
    }
    let svd = Svd::new(a);
    let r = svd.rank(tol);
    let scaled_v = Matrix::from_fn(cols, r, |i, k| svd.v[(i, k)] / svd.singular_values[k]);
    Ok(scaled_v * svd.u.columns(0, r).transpose())
}

/// Numerical rank at the given tolerance.
pub fn rank(a: &Matrix, tol: &Tolerance) -> Result<usize> {
    ensure_finite(a, "rank input")?;
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 || max_abs(a) == 0.0 {
        return Ok(0);
    }
    Ok(Svd::new(a).rank(tol))
}

/// Ratio of the largest to the smallest singular value (infinite when singular).
pub fn condition_number(a: &Matrix) -> Result<f64> {
    ensure_finite(a, "condition_number input")?;
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return Ok(1.0);
    }
    let svd = Svd::new(a);
    let smax = svd.singular_values[0];
    let smin = *svd.singular_values.last().expect("nonempty");
    if smin <= 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(smax / smin)
    }
}

/// Factor a symmetric PSD matrix as `K = F Fᵀ`.
///
/// Columns of `F` are eigenvectors scaled by the square roots of their
/// eigenvalues, ordered by descending eigenvalue, each with its first nonzero
/// component positive. Eigenvalues in `[-abs_psd, 0)` are clipped to zero,
/// as are eigenvalues below the rank cutoff `rcond · λ_max · n`, so samples
/// `F z` stay inside the range reported by [`range_projector`]. The PSD
/// bounds are measured relative to `max(1, max|K_ij|)`.
pub fn psd_factor(k: &Matrix, tol: &Tolerance) -> Result<Matrix> {
    ensure_finite(k, "covariance")?;
    let n = k.nrows();
    if k.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "psd_factor needs a square matrix, got {}x{}",
            n,
            k.ncols()
        )));
    }
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let scale = max_abs(k).max(1.0);
    let asym = max_abs(&(k - k.transpose()));
    if asym > tol.abs_psd * scale {
        return Err(Error::NotPsd(format!("asymmetry {asym:.3e} exceeds tolerance")));
    }
    let eig = SymmetricEigen::new(symmetrize(k));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let min_eig = eig.eigenvalues[order[n - 1]];
    if min_eig < -tol.abs_psd * scale {
        return Err(Error::NotPsd(format!("eigenvalue {min_eig:.3e} below tolerance")));
    }
    let cutoff = tol.rcond * eig.eigenvalues[order[0]].max(0.0) * n as f64;
    let mut f = Matrix::zeros(n, n);
    for (col, &idx) in order.iter().enumerate() {
        let lambda = eig.eigenvalues[idx];
        if lambda <= cutoff || lambda <= 0.0 {
            continue;
        }
        let mut v = eig.eigenvectors.column(idx).clone_owned();
        let lead = v.iter().find(|x| x.abs() > 1e-14).copied().unwrap_or(1.0);
        if lead < 0.0 {
            v.neg_mut();
        }
        f.set_column(col, &(v * lambda.sqrt()));
    }
    Ok(f)
}

/// Largest singular value; zero for the zero or empty matrix.
pub fn spectral_norm(a: &Matrix) -> Result<f64> {
    ensure_finite(a, "spectral_norm input")?;
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 || max_abs(a) == 0.0 {
        return Ok(0.0);
    }
    Ok(Svd::new(a).singular_values[0])
}

/// Orthogonal projector onto the column space of `a`.
pub fn range_projector(a: &Matrix, tol: &Tolerance) -> Result<Matrix> {
    ensure_finite(a, "range_projector input")?;
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 || max_abs(a) == 0.0 {
        return Ok(Matrix::zeros(rows, rows));
    }
    let svd = Svd::new(a);
    let basis = svd.u.columns(0, svd.rank(tol));
    Ok(symmetrize(&(basis * basis.transpose())))
}

/// Largest of the four scale-normalized Penrose defects
/// `‖AXA - A‖/‖A‖`, `‖XAX - X‖/‖X‖`, `‖(AX)ᵀ - AX‖`, `‖(XA)ᵀ - XA‖`.
pub fn penrose_defect(a: &Matrix, x: &Matrix) -> f64 {
    let ax = a * x;
    let xa = x * a;
    let rel = |err: f64, scale: f64| if scale > 0.0 { err / scale } else { err };
    [
        rel((&ax * a - a).norm(), a.norm()),
        rel((&xa * x - x).norm(), x.norm()),
        (&ax - ax.transpose()).norm(),
        (&xa - xa.transpose()).norm(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}
