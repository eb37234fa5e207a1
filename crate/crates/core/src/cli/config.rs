use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arrays::{FuzzyPrior, MeanFunction};
use crate::kernels::KernelSpec;
use crate::linalg::Tolerance;

use super::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub kernel: KernelSpec,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerance,
    /// Monte-Carlo sample count.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub krige: KrigeConfig,
    #[serde(default)]
    pub svm: SvmConfig,
    #[serde(default)]
    pub fuzzy: FuzzyConfig,
    #[serde(default)]
    pub condition: ConditionConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

fn default_samples() -> usize {
    100_000
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KrigeConfig {
    pub mean: MeanFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    /// Duality-gap tolerance for training.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative tolerance of the margin report.
    pub margin_tol: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            tol: 1e-8,
            max_iter: 1_000_000,
            margin_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FuzzyConfig {
    pub prior: FuzzyPrior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConditionConfig {
    /// Posterior draws written to `samples.csv`.
    pub draws: usize,
}

impl Default for ConditionConfig {
    fn default() -> Self {
        ConditionConfig { draws: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub gmt: GmtConfig,
    pub disintegration: DisintegrationConfig,
    pub entropy: EntropyConfig,
    pub continuity: ContinuityConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GmtConfig {
    pub models: usize,
    pub right_inverses: usize,
    /// Dimension of the model.
    pub dim: usize,
    /// Dimension of the observation.
    pub obs_dim: usize,
}

impl Default for GmtConfig {
    fn default() -> Self {
        GmtConfig {
            models: 20,
            right_inverses: 100,
            dim: 8,
            obs_dim: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisintegrationConfig {
    /// Number of leading data points observed; half of them when absent.
    pub observed: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntropyConfig {
    pub grid_points: usize,
    /// Largest relative change of the integral allowed under grid doubling.
    pub refinement_tol: f64,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        EntropyConfig {
            grid_points: 64,
            refinement_tol: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuityConfig {
    /// Number of leading data points observed; half of them when absent.
    pub observed: Option<usize>,
    /// Lengthscales `ℓ (1 + 2^-k)` for `k = 1..=steps`.
    pub steps: usize,
    /// Size of the random data perturbation.
    pub perturbation: f64,
    /// Covariance scale factor of the invariance check.
    pub scale: f64,
}

impl Default for ContinuityConfig {
    fn default() -> Self {
        ContinuityConfig {
            observed: None,
            steps: 12,
            perturbation: 1e-3,
            scale: 3.0,
        }
    }
}

impl Config {
    pub fn minimal(kernel: KernelSpec, seed: u64) -> Self {
        Config {
            kernel,
            seed: Some(seed),
            tolerances: Tolerance::default(),
            samples: default_samples(),
            krige: KrigeConfig::default(),
            svm: SvmConfig::default(),
            fuzzy: FuzzyConfig::default(),
            condition: ConditionConfig::default(),
            verify: VerifyConfig::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Config, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Config = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner().to_string();
            if path == "." || inner.starts_with(&path) {
                CliError::Input(format!("config: {inner}"))
            } else {
                CliError::Input(format!("config: {path}: {inner}"))
            }
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let field = |path: &str, msg: &str| Err(CliError::Input(format!("config: {path}: {msg}")));
        if let Err(e) = self.tolerances.validate() {
            return Err(CliError::Input(format!("config: tolerances: {e}")));
        }
        if self.samples < 2 {
            return field("samples", "must be >= 2");
        }
        if !(self.svm.tol.is_finite() && self.svm.tol > 0.0) {
            return field("svm.tol", "must be > 0");
        }
        if !(self.svm.margin_tol.is_finite() && self.svm.margin_tol > 0.0) {
            return field("svm.margin_tol", "must be > 0");
        }
        let g = &self.verify.gmt;
        if g.dim == 0 || g.obs_dim == 0 || g.obs_dim > g.dim {
            return field("verify.gmt.obs_dim", "must satisfy 1 <= obs_dim <= dim");
        }
        if self.verify.entropy.grid_points < 2 {
            return field("verify.entropy.grid_points", "must be >= 2");
        }
        if !(self.verify.entropy.refinement_tol.is_finite() && self.verify.entropy.refinement_tol > 0.0) {
            return field("verify.entropy.refinement_tol", "must be > 0");
        }
        let c = &self.verify.continuity;
        if c.steps == 0 {
            return field("verify.continuity.steps", "must be >= 1");
        }
        if !(c.perturbation.is_finite() && c.perturbation > 0.0) {
            return field("verify.continuity.perturbation", "must be > 0");
        }
        if !(c.scale.is_finite() && c.scale > 0.0) {
            return field("verify.continuity.scale", "must be > 0");
        }
        Ok(())
    }
}

pub fn parse_config(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
    Config::from_json(&text)
}
