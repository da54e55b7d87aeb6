//! JSON configuration schemas. Unknown keys are rejected so that typos in a
//! scenario never silently change a study.

use std::path::Path;

use marma::link::Link;
use marma::model::{ModelSpec, ParamVector};
use marma::simulation::{CovariateRule, Harmonic, ScenarioSpec};
use serde::{Deserialize, Serialize};

use crate::AppError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub p: usize,
    pub q: usize,
    pub link: Link,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaConfig {
    pub alpha: f64,
    #[serde(default)]
    pub beta: Vec<f64>,
    #[serde(default)]
    pub phi: Vec<f64>,
    #[serde(default)]
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelConfig,
    pub gamma: GammaConfig,
    #[serde(default)]
    pub covariates: Vec<Harmonic>,
    pub n: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    pub seed: u64,
}

fn default_burn_in() -> usize {
    100
}

fn default_replicas() -> usize {
    1
}

impl ScenarioConfig {
    pub fn to_scenario(&self) -> Result<ScenarioSpec, AppError> {
        let spec = ModelSpec::new(
            self.model.p,
            self.model.q,
            self.covariates.len(),
            self.model.link,
        );
        let gamma = ParamVector::new(
            self.gamma.alpha,
            self.gamma.beta.clone(),
            self.gamma.phi.clone(),
            self.gamma.theta.clone(),
        )?;
        if gamma.beta.len() != spec.r || gamma.phi.len() != spec.p || gamma.theta.len() != spec.q {
            return Err(AppError::Validation(
                "gamma layout does not match model order / covariate count".into(),
            ));
        }
        let covariates = if self.covariates.is_empty() {
            CovariateRule::None
        } else {
            CovariateRule::Harmonics(self.covariates.clone())
        };
        Ok(ScenarioSpec {
            spec,
            gamma,
            n: self.n,
            burn_in: self.burn_in,
            covariates,
            replicas: self.replicas,
            seed: self.seed,
        })
    }
}

/// The study to run on a scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum StudyConfig {
    /// Point-estimation summary (mean/median/SD per parameter).
    Point,
    /// Residual goodness-of-fit rejection rates at the 5% level.
    Gof,
    /// Bootstrap prediction-interval coverage.
    Coverage {
        horizon: usize,
        boot: usize,
        levels: Vec<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub scenario: ScenarioConfig,
    pub study: StudyConfig,
}

pub fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<(T, Vec<u8>), AppError> {
    let bytes = std::fs::read(path).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
    let value = serde_json::from_slice(&bytes)
        .map_err(|e| AppError::Validation(format!("{}: {e}", path.display())))?;
    Ok((value, bytes))
}
