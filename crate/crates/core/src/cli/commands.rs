use serde_json::json;

use crate::arrays::{self, ArrayDesign};
use crate::disintegration::{self, TestFunction};
use crate::kernels::{self, IndexPoint, IndexedDataset};
use crate::linalg::{self, Vector};
use crate::model::{self, AffineEstimator, FiniteModel, ObservationMap, SupportPolicy};
use crate::rng;
use crate::svm::{self, SvmProblem};

use super::data::{columns, parse_csv, render_csv};
use super::{CliError, Inputs, Outcome};

fn dataset(bytes: &[u8], d: Option<usize>, q: usize, what: &str) -> Result<IndexedDataset, CliError> {
    let ds = parse_csv(bytes, d, q).map_err(|e| CliError::Input(format!("{what}: {e}")))?;
    if ds.points.is_empty() {
        return Err(CliError::Input(format!("{what}: no data rows")));
    }
    Ok(ds)
}

fn values_of(ds: &IndexedDataset, what: &str) -> Result<Vec<Vector>, CliError> {
    ds.values
        .clone()
        .ok_or_else(|| CliError::Input(format!("{what}: value columns v_1.. are required")))
}

/// Query points from `--query`, or the data points when absent.
fn query_points(inp: &Inputs, data: &IndexedDataset, q: usize) -> Result<Vec<IndexPoint>, CliError> {
    match &inp.query {
        Some(bytes) => Ok(dataset(bytes, Some(data.points[0].dim()), q, "query")?.points),
        None => Ok(data.points.clone()),
    }
}

/// Query points followed by the extra points not among them; returns the
/// union and the positions of `extra` within it.
fn union(query: &[IndexPoint], extra: &[IndexPoint]) -> (Vec<IndexPoint>, Vec<usize>) {
    let mut points = query.to_vec();
    let positions = extra
        .iter()
        .map(|p| match points.iter().position(|x| x == p) {
            Some(k) => k,
            None => {
                points.push(p.clone());
                points.len() - 1
            }
        })
        .collect();
    (points, positions)
}

/// Labels 0/1 split into the two index lists of `points`.
fn split_labels(ds: &IndexedDataset) -> Result<(Vec<usize>, Vec<usize>), CliError> {
    let values = values_of(ds, "data")?;
    let (mut d0, mut d1) = (Vec::new(), Vec::new());
    for (k, v) in values.iter().enumerate() {
        match v[0] {
            0.0 => d0.push(k),
            1.0 => d1.push(k),
            x => {
                return Err(CliError::Input(format!(
                    "data: row {} column {}: label {x} is not 0 or 1",
                    k + 2,
                    ds.points[k].dim() + 1
                )))
            }
        }
    }
    Ok((d0, d1))
}

fn point_rows<'a>(
    points: &'a [IndexPoint],
    extra: impl Fn(usize) -> Vec<f64> + 'a,
) -> impl Iterator<Item = Vec<f64>> + 'a {
    points.iter().enumerate().map(move |(k, p)| {
        let mut row = p.0.clone();
        row.extend(extra(k));
        row
    })
}

fn flatten(values: &[Vector]) -> Vector {
    Vector::from_iterator(
        values.iter().map(Vector::len).sum(),
        values.iter().flat_map(|v| v.iter().cloned()),
    )
}

fn observed_count(configured: Option<usize>, n: usize, path: &str) -> Result<usize, CliError> {
    let k = configured.unwrap_or(n.div_ceil(2));
    if k == 0 || k > n {
        return Err(CliError::Input(format!("config: {path}: must lie in 1..={n}")));
    }
    Ok(k)
}

pub(crate) fn krige(inp: &Inputs) -> Result<Outcome, CliError> {
    let cfg = inp.config();
    let q = cfg.kernel.output_dim();
    let data = dataset(inp.data("krige")?, None, q, "data")?;
    let values = values_of(&data, "data")?;
    let query = query_points(inp, &data, q)?;
    let (points, observed) = union(&query, &data.points);
    let design = ArrayDesign::new(points, cfg.kernel.clone())?.with_mean(cfg.krige.mean.clone())?;
    let result = arrays::krige_with(&design, &observed, &values, &cfg.tolerances)?;
    let residual = observed
        .iter()
        .zip(&values)
        .map(|(&k, y)| (&result.predictions[k] - y).amax())
        .fold(0.0, f64::max);
    let scale = values.iter().map(|y| y.amax()).fold(1.0, f64::max);

    let mut out = Outcome::default();
    out.metric("observed", observed.len());
    out.metric("query", query.len());
    out.metric("jitter", result.jitter);
    out.metric("condition_number", result.condition_number);
    out.metric("max_observed_residual", residual);
    if q == 1 {
        let diam = kernels::diameter(&cfg.kernel, &query)?;
        let grid = kernels::default_entropy_grid(diam);
        out.metric(
            "entropy_integral",
            kernels::entropy_integral(&cfg.kernel, &query, &grid)?,
        );
    }
    out.check("observed_reproduced", residual <= 1e-8 * scale);
    let mut header = columns("i", query[0].dim());
    header.extend(columns("v", q));
    let preds = &result.predictions;
    out.file(
        "predictions.csv",
        render_csv(&header, point_rows(&query, |k| preds[k].iter().cloned().collect())),
    );
    Ok(out)
}

pub(crate) fn classify_svm(inp: &Inputs) -> Result<Outcome, CliError> {
    let cfg = inp.config();
    let data = dataset(inp.data("classify-svm")?, None, 1, "data")?;
    let (i0, i1) = split_labels(&data)?;
    let pick = |idx: &[usize]| idx.iter().map(|&k| data.points[k].clone()).collect::<Vec<_>>();
    let problem = SvmProblem::new(cfg.kernel.clone(), pick(&i0), pick(&i1))?;
    let trained = svm::svm_train(&problem, cfg.svm.tol, cfg.svm.max_iter)?;
    let margins = svm::margin_check(&trained, &problem, cfg.svm.margin_tol)?;
    let query = query_points(inp, &data, 1)?;
    let decisions = svm::svm_classify_batch(&trained, &problem, &query)?;

    let mut out = Outcome::default();
    out.metric("rho", trained.rho);
    out.metric("b", trained.b);
    out.metric("gap", trained.gap);
    out.metric("iterations", trained.iterations);
    out.metric("support_vectors", margins.support0.len() + margins.support1.len());
    out.metric("max_margin_defect", margins.max_margin_defect);
    out.metric("min_pair_separation", margins.min_pair_separation);
    out.metric("kernel_norm2", margins.kernel_norm2);
    out.metric("training_errors", margins.training_errors);
    out.check("duality_gap", trained.gap <= cfg.svm.tol);
    out.check("objective_monotone", trained.monotone);
    out.check("margins", margins.margins_ok);
    out.check("separation", margins.separation_ok);
    out.check("separation_vector_consistent", margins.xi_consistent);
    out.check("training_errors_zero", margins.training_errors == 0);
    let model_json = json!({
        "kernel": problem.kernel,
        "d0": problem.d0,
        "d1": problem.d1,
        "nu0": trained.nu0,
        "nu1": trained.nu1,
        "rho": trained.rho,
        "b": trained.b,
        "gap": trained.gap,
    });
    out.file(
        "model.json",
        format!(
            "{}\n",
            serde_json::to_string_pretty(&model_json).expect("model serializes")
        ),
    );
    let mut header = columns("i", query[0].dim());
    header.extend(["decision".to_string(), "label".to_string()]);
    out.file(
        "classifications.csv",
        render_csv(
            &header,
            point_rows(&query, |k| vec![decisions[k].0, f64::from(decisions[k].1)]),
        ),
    );
    Ok(out)
}

pub(crate) fn classify_fuzzy(inp: &Inputs) -> Result<Outcome, CliError> {
    let cfg = inp.config();
    let data = dataset(inp.data("classify-fuzzy")?, None, 1, "data")?;
    let (i0, i1) = split_labels(&data)?;
    let query = query_points(inp, &data, 1)?;
    let (points, positions) = union(&query, &data.points);
    let d0: Vec<usize> = i0.iter().map(|&k| positions[k]).collect();
    let d1: Vec<usize> = i1.iter().map(|&k| positions[k]).collect();
    let design = ArrayDesign::new(points, cfg.kernel.clone())?;
    let lambda = arrays::fuzzy_classify_with(&design, &d0, &d1, cfg.fuzzy.prior, &cfg.tolerances)?;
    let residual = d0
        .iter()
        .map(|&k| lambda[k].abs())
        .chain(d1.iter().map(|&k| (lambda[k] - 1.0).abs()))
        .fold(0.0, f64::max);

    let mut out = Outcome::default();
    out.metric("labelled", d0.len() + d1.len());
    out.metric("query", query.len());
    out.metric("max_label_residual", residual);
    out.check("labels_reproduced", residual <= 1e-8);
    let mut header = columns("i", query[0].dim());
    header.push("lambda".into());
    out.file(
        "lambda.csv",
        render_csv(&header, point_rows(&query, |k| vec![lambda[k]])),
    );
    Ok(out)
}

pub(crate) fn condition(inp: &Inputs) -> Result<Outcome, CliError> {
    let cfg = inp.config();
    let seed = inp.seed("condition")?;
    let q = cfg.kernel.output_dim();
    let data = dataset(inp.data("condition")?, None, q, "data")?;
    let values = values_of(&data, "data")?;
    let query = query_points(inp, &data, q)?;
    let (points, observed) = union(&query, &data.points);
    let design = ArrayDesign::new(points, cfg.kernel.clone())?.with_mean(cfg.krige.mean.clone())?;
    let (model, obs, est) = arrays::kriging_estimator(&design, &observed, &cfg.tolerances)?;
    let y = flatten(&values);
    let cond = disintegration::conditional_from(&model, &est, &y, &cfg.tolerances)?;
    let draws = disintegration::stochastic_ols_sample(&cond, seed, cfg.condition.draws);
    let fiber = disintegration::fiber_defect(&obs, &y, &draws);
    let var = cond.residual_cov.diagonal();

    let mut out = Outcome::default();
    out.metric("observed", observed.len());
    out.metric("query", query.len());
    out.metric("draws", draws.len());
    out.metric("fiber_defect", fiber);
    out.metric("max_posterior_variance", var.max());
    out.check("draws_on_fiber", fiber <= 1e-8 * (1.0 + y.amax()));
    let d = query[0].dim();
    let mut header = columns("i", d);
    header.extend(columns("mean", q));
    header.extend(columns("var", q));
    out.file(
        "posterior.csv",
        render_csv(
            &header,
            point_rows(&query, |k| {
                let mut row: Vec<f64> = (0..q).map(|r| cond.mean[k * q + r]).collect();
                row.extend((0..q).map(|r| var[k * q + r]));
                row
            }),
        ),
    );
    let mut header = vec!["draw".to_string()];
    header.extend(columns("i", d));
    header.extend(columns("v", q));
    let rows = draws.iter().enumerate().flat_map(|(s, v)| {
        query.iter().enumerate().map(move |(k, p)| {
            let mut row = vec![s as f64];
            row.extend(p.0.iter().cloned());
            row.extend((0..q).map(|r| v[k * q + r]));
            row
        })
    });
    out.file("samples.csv", render_csv(&header, rows));
    Ok(out)
}

/// Seeded model with covariance `A Aᵀ / n`, observation map and functional.
fn random_problem(
    seed: u64,
    index: u64,
    n: usize,
    p: usize,
) -> Result<(FiniteModel, ObservationMap, Vector), CliError> {
    let mut r = rng::seeded(seed, 0x4700 + index);
    let a = rng::standard_normal_matrix(&mut r, n, n);
    let cov = linalg::symmetrize(&(&a * a.transpose() / n as f64));
    let mean = rng::standard_normal_vector(&mut r, n);
    let g = rng::standard_normal_matrix(&mut r, p, n);
    let f = rng::standard_normal_vector(&mut r, n);
    let model = FiniteModel::new(mean, cov, format!("random model {index}"), &Default::default())?;
    Ok((model, ObservationMap::new(g)?, f))
}

pub(crate) fn verify_gmt(inp: &Inputs) -> Result<Outcome, CliError> {
    let cfg = inp.config();
    let seed = inp.seed("verify gmt")?;
    let g = &cfg.verify.gmt;
    let (mut estvar_violations, mut mse_violations, mut equality_mismatch) = (0usize, 0usize, 0usize);
    let (mut min_estvar_slack, mut min_mse_slack, mut max_identity) = (f64::INFINITY, f64::INFINITY, 0.0f64);
    for k in 0..g.models {
        let (model, obs, f) = random_problem(seed, k as u64, g.dim, g.obs_dim)?;
        let est = model::ols_build(&model, &obs, &cfg.tolerances)?;
        let alternatives = (0..g.right_inverses)
            .map(|j| {
                let gain = model::random_right_inverse(&est, seed ^ ((k as u64) << 32 | j as u64))?;
                AffineEstimator::centered(&model, &obs, gain)
            })
            .collect::<crate::Result<Vec<_>>>()?;
        let report = model::gmt_compare(&model, &obs, &f, &alternatives, &cfg.tolerances)?;
        for e in &report.entries {
            estvar_violations += usize::from(!e.estvar_holds);
            mse_violations += usize::from(!e.mse_holds);
            min_estvar_slack = min_estvar_slack.min(e.estvar_slack);
            min_mse_slack = min_mse_slack.min(e.mse_slack);
        }
        equality_mismatch += usize::from(!report.equality_consistent);
        max_identity = max_identity.max(report.max_identity_residual);
    }
    let mut out = Outcome::default();
    out.metric("comparisons", g.models * g.right_inverses);
    out.metric("estvar_violations", estvar_violations);
    out.metric("mse_violations", mse_violations);
    out.metric("min_estvar_slack", min_estvar_slack);
    out.metric("min_mse_slack", min_mse_slack);
    out.metric("max_identity_residual", max_identity);
    out.check("estimated_variance_inequality", estvar_violations == 0);
    out.check("mean_squared_error_inequality", mse_violations == 0);
    out.check("equality_only_for_equal_adjoint", equality_mismatch == 0);
    out.check("bias_variance_identity", max_identity <= model::GMT_SLACK);
    Ok(out)
}

pub(crate) fn verify_disintegration(inp: &Inputs) -> Result<Outcome, CliError> {
    let cfg = inp.config();
    let seed = inp.seed("verify disintegration")?;
    let q = cfg.kernel.output_dim();
    let data = dataset(inp.data("verify disintegration")?, None, q, "data")?;
    let n = data.points.len();
    let k = observed_count(cfg.verify.disintegration.observed, n, "verify.disintegration.observed")?;
    let design = ArrayDesign::new(data.points.clone(), cfg.kernel.clone())?;
    let model = arrays::model_from_design(&design)?;
    let obs = arrays::restriction_map(&design, &(0..k).collect::<Vec<_>>())?;
    let battery: Vec<TestFunction> = disintegration::default_battery(model.dim(), seed);
    let report =
        disintegration::disintegration_check_gaussian(&model, &obs, &battery, seed, cfg.samples, &cfg.tolerances)?;
    let mut out = Outcome::default();
    out.metric("method", &report.method);
    out.metric("samples", report.samples);
    out.metric("observed", k);
    out.metric("test_functions", &report.results);
    let worst = report
        .results
        .iter()
        .map(|r| {
            if r.standard_error > 0.0 {
                r.difference.abs() / r.standard_error
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    out.metric("max_standard_scores", worst);
    out.check("disintegration", report.pass);
    Ok(out)
}

pub(crate) fn verify_uii(_inp: &Inputs) -> Result<Outcome, CliError> {
    let (_, _, rep) = disintegration::uii_counterexample();
    let mut out = Outcome::default();
    out.metric("coordinate_covariance", rep.coordinate_covariance);
    out.metric("forbidden_point", &rep.forbidden_point);
    out.metric("forbidden_mass_original", rep.forbidden_mass_original);
    out.metric("forbidden_mass_convolution", rep.forbidden_mass_convolution);
    out.metric("total_variation", rep.total_variation);
    out.metric("convolution_atoms", &rep.convolution.atoms);
    out.check("uncorrelated", rep.coordinate_covariance == 0.0);
    out.check(
        "forbidden_mass_exact",
        rep.forbidden_mass_original == 0.0 && rep.forbidden_mass_convolution == 1.0 / 16.0,
    );
    out.check("total_variation_at_least_1_16", rep.total_variation >= 1.0 / 16.0);
    out.check("disintegration_violated", rep.disintegration_violated);
    Ok(out)
}

pub(crate) fn verify_entropy(inp: &Inputs) -> Result<Outcome, CliError> {
    let cfg = inp.config();
    if cfg.kernel.output_dim() != 1 {
        return Err(CliError::Input("verify entropy needs a scalar kernel".into()));
    }
    let data = dataset(inp.data("verify entropy")?, None, 1, "data")?;
    let points = &data.points;
    let diam = kernels::diameter(&cfg.kernel, points)?;
    let base = if diam > 0.0 { diam } else { 1.0 };
    let m = cfg.verify.entropy.grid_points;
    let coarse = kernels::entropy_profile(&cfg.kernel, points, &kernels::log_grid(base, m))?;
    let fine = kernels::entropy_profile(&cfg.kernel, points, &kernels::log_grid(base, 2 * m - 1))?;
    let change = if coarse.integral == 0.0 && fine.integral == 0.0 {
        0.0
    } else {
        (fine.integral - coarse.integral).abs() / coarse.integral.abs().max(fine.integral.abs())
    };
    let mut out = Outcome::default();
    out.metric("points", points.len());
    out.metric("diameter", diam);
    out.metric("integral", coarse.integral);
    out.metric("refined_integral", fine.integral);
    out.metric("refinement_change", change);
    out.check("counts_nonincreasing", coarse.counts.windows(2).all(|w| w[1] <= w[0]));
    out.check("refinement_stable", change <= cfg.verify.entropy.refinement_tol);
    out.file(
        "entropy.csv",
        render_csv(
            &["epsilon".to_string(), "count".to_string()],
            coarse.grid.iter().zip(&coarse.counts).map(|(e, c)| vec![*e, *c as f64]),
        ),
    );
    Ok(out)
}

pub(crate) fn verify_continuity(inp: &Inputs) -> Result<Outcome, CliError> {
    let cfg = inp.config();
    let seed = inp.seed("verify continuity")?;
    let c = &cfg.verify.continuity;
    let tol = &cfg.tolerances;
    let q = cfg.kernel.output_dim();
    let data = dataset(inp.data("verify continuity")?, None, q, "data")?;
    let n = data.points.len();
    let k = observed_count(c.observed, n, "verify.continuity.observed")?;
    let subset: Vec<usize> = (0..k).collect();
    let design = ArrayDesign::new(data.points.clone(), cfg.kernel.clone())?;
    let (base, obs, est) = arrays::kriging_estimator(&design, &subset, tol)?;
    let mut r = rng::seeded(seed, 0x434e);
    let y = match &data.values {
        Some(v) => flatten(&v[..k]),
        None => rng::standard_normal_vector(&mut r, k * q),
    };
    let centered = &y - &est.obs_mean;
    let m0 = model::operator_norm(&est)?;
    let scaled = model::ols_build(&base.scaled(c.scale), &obs, tol)?;
    let m_scaled = model::operator_norm(&scaled)?;
    let v0 = est.estimate_with(&y, SupportPolicy::Project)?;

    let mut rows = Vec::with_capacity(c.steps);
    let mut deltas = Vec::with_capacity(c.steps);
    let mut bounded = true;
    for step in 1..=c.steps {
        let ell = cfg.kernel.lengthscale * (1.0 + 0.5f64.powi(step as i32));
        let kernel = cfg.kernel.with_lengthscale(ell);
        let model_k = arrays::model_from_design(&ArrayDesign::new(data.points.clone(), kernel)?)?;
        let est_k = model::ols_build(&model_k, &obs, tol)?;
        let delta = model::delta_norm(&base, &model_k, &obs, tol)?;
        let m_k = model::operator_norm(&est_k)?;
        let noise = rng::standard_normal_vector(&mut r, k * q);
        let dy = &est_k.range_projector * noise * c.perturbation;
        let moved = (est_k.estimate_with(&(&y + &dy), SupportPolicy::Project)? - &v0).norm();
        let bound = m_k * dy.norm() + delta * centered.norm();
        bounded &= moved <= bound * (1.0 + 1e-9) + 1e-12;
        deltas.push(delta);
        rows.push(vec![step as f64, ell, delta, m_k, moved, bound]);
    }
    let decreasing = deltas.windows(2).all(|w| w[1] < w[0]);
    let last = *deltas.last().expect("at least one step");

    let mut out = Outcome::default();
    out.metric("operator_norm", m0);
    out.metric("operator_norm_scaled", m_scaled);
    out.metric("deltas", &deltas);
    out.metric("observed", k);
    out.check("operator_norm_finite", m0.is_finite());
    out.check(
        "operator_norm_scale_invariant",
        (m_scaled - m0).abs() <= 1e-8 * m0.max(1.0),
    );
    out.check("delta_strictly_decreasing", decreasing);
    out.check("delta_below_1e-3", last < 1e-3);
    out.check("perturbation_bounded", bounded);
    let header: Vec<String> = ["step", "lengthscale", "delta", "operator_norm", "perturbation", "bound"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    out.file("continuity.csv", render_csv(&header, rows));
    Ok(out)
}
