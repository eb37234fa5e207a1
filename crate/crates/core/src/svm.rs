//! Hard-margin kernel SVM as the nearest-point problem between the convex
//! hulls of the two embedded label sets.
//!
//! With hull points `u0 = Σ ν0_j φ(d0_j)` and `u1 = Σ ν1_j φ(d1_j)`, the
//! separation vector is `ξ = u1 - u0` and the margin is `ρ = ‖ξ‖`. All
//! geometry is computed through kernel sums.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{self, IndexPoint, KernelSpec};
use crate::linalg::{Matrix, Vector};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmProblem {
    pub kernel: KernelSpec,
    pub d0: Vec<IndexPoint>,
    pub d1: Vec<IndexPoint>,
}

impl SvmProblem {
    pub fn new(kernel: KernelSpec, d0: Vec<IndexPoint>, d1: Vec<IndexPoint>) -> Result<Self> {
        let p = SvmProblem { kernel, d0, d1 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kernel.output_dim() != 1 {
            return Err(Error::InvalidInput("SVM needs a scalar kernel".into()));
        }
        if self.d0.is_empty() || self.d1.is_empty() {
            return Err(Error::InvalidInput("both labelled sets must be nonempty".into()));
        }
        let d = self.d0[0].dim();
        if self.d0.iter().chain(&self.d1).any(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch(
                "training points of different dimension".into(),
            ));
        }
        if let Some(p) = self.d0.iter().find(|p| self.d1.contains(p)) {
            return Err(Error::OverlappingSets(format!("point {p} carries both labels")));
        }
        Ok(())
    }

    fn points(&self) -> Vec<IndexPoint> {
        self.d0.iter().chain(&self.d1).cloned().collect()
    }

    fn gram(&self) -> Result<Matrix> {
        kernels::gram(&self.kernel, &self.points())
    }
}

/// Starting weights for the nearest-point iteration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SvmInit {
    #[default]
    Uniform,
    /// Normalized exponential draws from the given seed.
    Random(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub nu0: Vec<f64>,
    pub nu1: Vec<f64>,
    pub rho: f64,
    pub b: f64,
    pub gap: f64,
    pub iterations: usize,
    /// The objective `‖ξ‖²` never increased between iterations.
    pub monotone: bool,
}

impl SvmModel {
    /// Signed expansion coefficients of `ξ` over `d0` followed by `d1`.
    pub fn coefficients(&self) -> Vector {
        Vector::from_iterator(
            self.nu0.len() + self.nu1.len(),
            self.nu0.iter().map(|w| -w).chain(self.nu1.iter().cloned()),
        )
    }
}

/// Iterations between exact recomputations of the inner products.
const REFRESH: usize = 256;

pub fn svm_train(problem: &SvmProblem, tol: f64, max_iter: usize) -> Result<SvmModel> {
    svm_train_with(problem, tol, max_iter, SvmInit::Uniform)
}

/// Mitchell–Demyanov–Malozemov iteration: in whichever hull shows the larger
/// spread of `h = ⟨ξ, φ(·)⟩`, move mass from the worst supported point to
/// the best point with an exact line search. Stops when the Frank–Wolfe gap
/// `‖ξ‖² - (min_{D1} h - max_{D0} h)` is at most `tol`.
pub fn svm_train_with(problem: &SvmProblem, tol: f64, max_iter: usize, init: SvmInit) -> Result<SvmModel> {
    problem.validate()?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be > 0, got {tol}")));
    }
    let c = problem.gram()?;
    let n0 = problem.d0.len();
    let m = c.nrows();
    let mut alpha = initial_weights(n0, m - n0, init);
    let mut h = &c * &alpha;
    let mut obj = alpha.dot(&h);
    let mut monotone = true;
    let mut iterations = 0;
    loop {
        if obj <= tol {
            return Err(Error::SeparationFailure {
                rho: obj.max(0.0).sqrt(),
            });
        }
        let gap = fw_gap(&h, obj, n0);
        if gap <= tol {
            h = &c * &alpha;
            obj = alpha.dot(&h);
            let gap = fw_gap(&h, obj, n0);
            if gap <= tol {
                return Ok(finish(&alpha, &h, obj, gap, n0, iterations, monotone));
            }
        }
        if iterations >= max_iter {
            return Err(Error::Convergence { iterations, gap });
        }
        iterations += 1;

        // hull 1: mass flows from the largest supported h to the smallest h
        let (s1, t1) = extremes(&h, &alpha, n0..m, true);
        // hull 0: mass flows from the smallest supported h to the largest h
        let (s0, t0) = extremes(&h, &alpha, 0..n0, false);
        let spread1 = h[s1] - h[t1];
        let spread0 = h[t0] - h[s0];
        let (from, to, spread, sign) = if spread1 >= spread0 {
            (s1, t1, spread1, 1.0)
        } else {
            (s0, t0, spread0, -1.0)
        };
        let curv = c[(from, from)] + c[(to, to)] - 2.0 * c[(from, to)];
        let avail = alpha[from].abs();
        let step = if curv > 0.0 { (spread / curv).min(avail) } else { avail };
        if step <= 0.0 {
            let gap = fw_gap(&h, obj, n0);
            return Err(Error::Convergence { iterations, gap });
        }
        alpha[from] -= sign * step;
        alpha[to] += sign * step;
        if alpha[from].abs() < 1e-300 {
            alpha[from] = 0.0;
        }
        if iterations % REFRESH == 0 {
            h = &c * &alpha;
        } else {
            for k in 0..m {
                h[k] += sign * step * (c[(k, to)] - c[(k, from)]);
            }
        }
        let next = alpha.dot(&h);
        if next > obj + 1e-14 * obj.abs().max(1.0) {
            monotone = false;
        }
        obj = next;
    }
}

fn initial_weights(n0: usize, n1: usize, init: SvmInit) -> Vector {
    let (w0, w1): (Vec<f64>, Vec<f64>) = match init {
        SvmInit::Uniform => (vec![1.0; n0], vec![1.0; n1]),
        SvmInit::Random(seed) => {
            let mut r = rng::seeded(seed, 0x5356);
            let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| -(1.0 - r.random::<f64>()).ln()).collect() };
            (draw(n0), draw(n1))
        }
    };
    let s0: f64 = w0.iter().sum();
    let s1: f64 = w1.iter().sum();
    Vector::from_iterator(n0 + n1, w0.iter().map(|w| -w / s0).chain(w1.iter().map(|w| w / s1)))
}

/// `(supported extreme, overall extreme)` of `h` over a hull; `high` picks
/// the supported maximum and overall minimum.
fn extremes(h: &Vector, alpha: &Vector, range: std::ops::Range<usize>, high: bool) -> (usize, usize) {
    let mut src = None::<usize>;
    let mut dst = range.start;
    for k in range {
        let better_dst = if high { h[k] < h[dst] } else { h[k] > h[dst] };
        if better_dst {
            dst = k;
        }
        if alpha[k] != 0.0 {
            let better_src = match src {
                None => true,
                Some(s) => {
                    if high {
                        h[k] > h[s]
                    } else {
                        h[k] < h[s]
                    }
                }
            };
            if better_src {
                src = Some(k);
            }
        }
    }
    (src.expect("simplex weights sum to one"), dst)
}

fn fw_gap(h: &Vector, obj: f64, n0: usize) -> f64 {
    let max0 = h.rows(0, n0).max();
    let min1 = h.rows(n0, h.len() - n0).min();
    (obj - (min1 - max0)).max(0.0)
}

fn finish(alpha: &Vector, h: &Vector, obj: f64, gap: f64, n0: usize, iterations: usize, monotone: bool) -> SvmModel {
    let nu0: Vec<f64> = alpha.rows(0, n0).iter().map(|w| -w).collect();
    let nu1: Vec<f64> = alpha.rows(n0, alpha.len() - n0).iter().cloned().collect();
    let xi_u0: f64 = nu0.iter().zip(h.rows(0, n0).iter()).map(|(w, x)| w * x).sum();
    let xi_u1: f64 = nu1
        .iter()
        .zip(h.rows(n0, h.len() - n0).iter())
        .map(|(w, x)| w * x)
        .sum();
    SvmModel {
        nu0,
        nu1,
        rho: obj.sqrt(),
        b: 0.5 * (xi_u0 + xi_u1),
        gap,
        iterations,
        monotone,
    }
}

/// `g(i) = Σ ν1 c(i, d1) - Σ ν0 c(i, d0) - b`.
pub fn svm_decision(model: &SvmModel, problem: &SvmProblem, i: &IndexPoint) -> Result<f64> {
    let d = problem.d0[0].dim();
    if i.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "query point of dimension {} for {d}-dimensional data",
            i.dim()
        )));
    }
    let k = &problem.kernel;
    let pos: f64 = model.nu1.iter().zip(&problem.d1).map(|(w, p)| w * k.scalar(i, p)).sum();
    let neg: f64 = model.nu0.iter().zip(&problem.d0).map(|(w, p)| w * k.scalar(i, p)).sum();
    Ok(pos - neg - model.b)
}

/// Label `1` iff `g(i) >= 0`.
pub fn svm_classify(model: &SvmModel, problem: &SvmProblem, i: &IndexPoint) -> Result<u8> {
    Ok(u8::from(svm_decision(model, problem, i)? >= 0.0))
}

pub fn svm_classify_batch(model: &SvmModel, problem: &SvmProblem, points: &[IndexPoint]) -> Result<Vec<(f64, u8)>> {
    points
        .par_iter()
        .map(|i| svm_decision(model, problem, i).map(|g| (g, u8::from(g >= 0.0))))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginReport {
    pub support0: Vec<usize>,
    pub support1: Vec<usize>,
    /// Largest `|g ∓ ρ²/2| / ρ²` over support vectors.
    pub max_margin_defect: f64,
    /// Smallest `⟨ξ, φ(d1) - φ(d0)⟩ / ρ` over training pairs.
    pub min_pair_separation: f64,
    /// `‖ξ‖²` from the full kernel double sum.
    pub kernel_norm2: f64,
    /// `⟨ξ, u1⟩ - ⟨ξ, u0⟩` from the decision values.
    pub decision_norm2: f64,
    pub training_errors: usize,
    pub margins_ok: bool,
    pub separation_ok: bool,
    pub xi_consistent: bool,
    pub pass: bool,
}

pub fn margin_check(model: &SvmModel, problem: &SvmProblem, tol: f64) -> Result<MarginReport> {
    let rho2 = model.rho * model.rho;
    let g0: Vec<f64> = problem
        .d0
        .iter()
        .map(|p| svm_decision(model, problem, p))
        .collect::<Result<_>>()?;
    let g1: Vec<f64> = problem
        .d1
        .iter()
        .map(|p| svm_decision(model, problem, p))
        .collect::<Result<_>>()?;
    let support0: Vec<usize> = (0..g0.len()).filter(|&k| model.nu0[k] > tol).collect();
    let support1: Vec<usize> = (0..g1.len()).filter(|&k| model.nu1[k] > tol).collect();
    let max_margin_defect = support0
        .iter()
        .map(|&k| (g0[k] + rho2 / 2.0).abs())
        .chain(support1.iter().map(|&k| (g1[k] - rho2 / 2.0).abs()))
        .fold(0.0, f64::max)
        / rho2;
    // ⟨ξ, φ(d)⟩ = g(d) + b
    let min1 = g1.iter().cloned().fold(f64::INFINITY, f64::min);
    let max0 = g0.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_pair_separation = (min1 - max0) / model.rho;
    let alpha = model.coefficients();
    let c = problem.gram()?;
    let kernel_norm2 = alpha.dot(&(&c * &alpha));
    let decision_norm2 = model.nu1.iter().zip(&g1).map(|(w, g)| w * g).sum::<f64>()
        - model.nu0.iter().zip(&g0).map(|(w, g)| w * g).sum::<f64>();
    let training_errors = g0.iter().filter(|&&g| g >= 0.0).count() + g1.iter().filter(|&&g| g < 0.0).count();
    let margins_ok = max_margin_defect <= tol;
    let separation_ok = min_pair_separation >= model.rho - tol;
    let scale = rho2.max(1.0);
    let xi_consistent = (kernel_norm2 - rho2).abs() <= tol * scale && (decision_norm2 - rho2).abs() <= tol * scale;
    Ok(MarginReport {
        support0,
        support1,
        max_margin_defect,
        min_pair_separation,
        kernel_norm2,
        decision_norm2,
        training_errors,
        margins_ok,
        separation_ok,
        xi_consistent,
        pass: margins_ok && separation_ok && xi_consistent && training_errors == 0,
    })
}

/// RKHS norm of the difference of the separation vectors of two models.
pub fn xi_distance(a: &SvmModel, b: &SvmModel, problem: &SvmProblem) -> Result<f64> {
    let d = a.coefficients() - b.coefficients();
    let c = problem.gram()?;
    Ok(d.dot(&(&c * &d)).max(0.0).sqrt())
}
