//! Fitted-model persistence: everything a later forecast or diagnose run
//! needs, saved as JSON.

use std::path::Path;

use marma::estimation::{FitResult, InfoCriteria};
use marma::model::{ModelSpec, ParamVector};
use marma::simulation::Harmonic;
use serde::{Deserialize, Serialize};

use crate::report::Meta;
use crate::AppError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub model: ModelSpec,
    pub gamma: ParamVector,
    pub loglik: f64,
    /// Row-major conditional information matrix.
    pub cond_info: Vec<Vec<f64>>,
    pub stderr: Option<Vec<f64>>,
    pub converged: bool,
    pub score_sup_norm: f64,
    pub clamp_count: usize,
    pub n_obs: usize,
    pub ic: InfoCriteria,
    /// Covariate column names, in model order.
    pub covariate_names: Vec<String>,
    /// Harmonic rule for the trailing generated covariates (empty when all
    /// covariates came from data columns).
    pub harmonics: Vec<Harmonic>,
    pub meta: Meta,
}

impl ModelFile {
    pub fn from_fit(
        fit: &FitResult,
        covariate_names: &[String],
        harmonics: &[Harmonic],
        meta: Meta,
    ) -> Self {
        let k = fit.spec.n_params();
        let cond_info = (0..k)
            .map(|i| (0..k).map(|j| fit.cond_info[(i, j)]).collect())
            .collect();
        Self {
            model: fit.spec,
            gamma: fit.gamma_hat.clone(),
            loglik: fit.loglik,
            cond_info,
            stderr: fit.stderr.clone(),
            converged: fit.converged,
            score_sup_norm: fit.score_sup_norm,
            clamp_count: fit.clamp_count,
            n_obs: fit.n_obs,
            ic: fit.ic,
            covariate_names: covariate_names.to_vec(),
            harmonics: harmonics.to_vec(),
            meta,
        }
    }

    /// Rebuilds a `FitResult` for the library routines.
    pub fn to_fit(&self) -> Result<FitResult, AppError> {
        let k = self.model.n_params();
        if self.cond_info.len() != k || self.cond_info.iter().any(|r| r.len() != k) {
            return Err(AppError::Validation("model file: bad information matrix shape".into()));
        }
        let cond_info = nalgebra_matrix(&self.cond_info);
        let covariance = cond_info.clone().cholesky().map(|c| c.inverse());
        Ok(FitResult {
            spec: self.model,
            gamma_hat: self.gamma.clone(),
            loglik: self.loglik,
            cond_info,
            covariance,
            stderr: self.stderr.clone(),
            score_sup_norm: self.score_sup_norm,
            n_evals: 0,
            converged: self.converged,
            clamp_count: self.clamp_count,
            ic: self.ic,
            n_obs: self.n_obs,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), AppError> {
        crate::report::write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self, AppError> {
        let (file, _) = crate::config::load_json::<ModelFile>(path)?;
        Ok(file)
    }
}

fn nalgebra_matrix(rows: &[Vec<f64>]) -> nalgebra::DMatrix<f64> {
    let n = rows.len();
    nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j])
}
