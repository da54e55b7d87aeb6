//! Partial maximum likelihood estimation: starting values, two-stage
//! optimization (BFGS on the analytic score, then a Nelder-Mead polish),
//! convergence reporting, standard errors and information criteria.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    cond_info_from_filter, filter, loglik_from_filter, score_from_filter, ModelSpec, ParamVector,
    SeriesData,
};
use crate::optim::{bfgs, nelder_mead, GradObjective, OptimOutcome, ValueObjective};

/// Options controlling the fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitOptions {
    /// Total budget of objective evaluations across both stages.
    pub max_evals: usize,
    /// Convergence requires the score sup-norm to fall below this.
    pub grad_tol: f64,
    /// Relative function-improvement tolerance for the optimizer stages.
    pub rel_f_tol: f64,
    /// Starting point; when absent, regression-based starting values are used.
    pub start: Option<ParamVector>,
    /// Run the derivative-free polish stage after BFGS.
    pub polish: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_evals: 10_000,
            grad_tol: 1e-4,
            rel_f_tol: 1e-12,
            start: None,
            polish: true,
        }
    }
}

/// Information criteria computed from the maximized partial likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoCriteria {
    pub aic: f64,
    pub bic: f64,
    pub hqc: f64,
}

/// AIC = −2ℓ̂ + 2k, BIC = −2ℓ̂ + k·ln n, HQC = −2ℓ̂ + 2k·ln(ln n).
pub fn information_criteria(loglik: f64, n: usize, k: usize) -> InfoCriteria {
    let n = n as f64;
    let k = k as f64;
    InfoCriteria {
        aic: -2.0 * loglik + 2.0 * k,
        bic: -2.0 * loglik + k * n.ln(),
        hqc: -2.0 * loglik + 2.0 * k * n.ln().ln(),
    }
}

/// A fitted model.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub spec: ModelSpec,
    /// The PMLE γ̂ (best iterate when not converged).
    pub gamma_hat: ParamVector,
    /// Maximized partial log-likelihood ℓ(γ̂).
    pub loglik: f64,
    /// Conditional information K_n(γ̂).
    pub cond_info: DMatrix<f64>,
    /// K_n(γ̂)⁻¹, absent when K_n is numerically singular.
    pub covariance: Option<DMatrix<f64>>,
    /// √ of the diagonal of K_n(γ̂)⁻¹, absent when K_n is singular.
    pub stderr: Option<Vec<f64>>,
    /// Sup-norm of the score at γ̂.
    pub score_sup_norm: f64,
    /// Objective evaluations spent.
    pub n_evals: usize,
    /// Whether the score sup-norm met `grad_tol`.
    pub converged: bool,
    /// Number of filter time points where μ hit the clamp bounds at γ̂.
    pub clamp_count: usize,
    pub ic: InfoCriteria,
    pub n_obs: usize,
}

/// Fits a MARMA model by partial maximum likelihood.
///
/// Non-convergence is reported through `converged = false` with the best
/// iterate retained; errors are reserved for structurally hopeless input
/// (dimension mismatches, too-short or constant series).
pub fn fit(data: &SeriesData, spec: &ModelSpec, options: &FitOptions) -> Result<FitResult> {
    let n = data.n();
    let k = spec.n_params();
    if n <= k {
        return Err(Error::Degenerate(format!(
            "need more than {k} observations to fit {k} parameters, got {n}"
        )));
    }
    if data.n_covariates() != spec.r {
        return Err(Error::Dimension(format!(
            "data has {} covariates, spec needs {}",
            data.n_covariates(),
            spec.r
        )));
    }
    let y = data.y();
    let spread = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - y.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread == 0.0 {
        return Err(Error::Degenerate("constant series".into()));
    }

    let start = match &options.start {
        Some(s) => {
            if s.len() != k {
                return Err(Error::Dimension("start vector does not match spec".into()));
            }
            s.clone()
        }
        None => default_start(data, spec)?,
    };

    // stage 1: BFGS on −ℓ with the analytic score
    let grad_obj = GradObjective {
        eval: Box::new(|flat: &[f64]| {
            let gamma = ParamVector::from_slice(spec, flat).ok()?;
            let out = filter(&gamma, data, spec).ok()?;
            let ll = loglik_from_filter(&out, data).ok()?;
            let u = score_from_filter(&out, data, spec);
            if !ll.is_finite() || u.iter().any(|v| !v.is_finite()) {
                return None;
            }
            Some((-ll, u.iter().map(|v| -v).collect()))
        }),
    };
    let start_flat = start.to_vec();
    let stage1 = bfgs(
        &grad_obj,
        &start_flat,
        options.grad_tol,
        options.rel_f_tol,
        options.max_evals,
    )
    .ok_or_else(|| {
        Error::InvalidArgument("log-likelihood not finite at starting values".into())
    })?;

    // stage 2: derivative-free polish
    let mut best: OptimOutcome = stage1;
    if options.polish && best.n_evals < options.max_evals {
        let value_obj = ValueObjective {
            eval: Box::new(|flat: &[f64]| {
                let gamma = ParamVector::from_slice(spec, flat).ok()?;
                let ll = crate::model::loglik(&gamma, data, spec).ok()?;
                ll.is_finite().then_some(-ll)
            }),
        };
        let budget = (options.max_evals - best.n_evals).min(400 * k);
        if let Some(polished) = nelder_mead(&value_obj, &best.x, options.rel_f_tol, budget) {
            let total = best.n_evals + polished.n_evals;
            if polished.value < best.value {
                best = polished;
            }
            best.n_evals = total;
        }
    }

    let gamma_hat = ParamVector::from_slice(spec, &best.x)?;
    let out = filter(&gamma_hat, data, spec)?;
    let loglik = loglik_from_filter(&out, data)?;
    let score = score_from_filter(&out, data, spec);
    let score_sup_norm = score.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cond_info = cond_info_from_filter(&out, spec);

    let covariance = invert_spd(&cond_info);
    let stderr = covariance.as_ref().map(|cov| {
        (0..k).map(|j| cov[(j, j)].sqrt()).collect::<Vec<f64>>()
    });
    let stderr = match stderr {
        Some(s) if s.iter().all(|v| v.is_finite() && *v > 0.0) => Some(s),
        _ => None,
    };
    let covariance = if stderr.is_some() { covariance } else { None };

    let converged = score_sup_norm <= options.grad_tol;

    Ok(FitResult {
        spec: *spec,
        gamma_hat,
        loglik,
        cond_info,
        covariance,
        stderr,
        score_sup_norm,
        n_evals: best.n_evals,
        converged,
        clamp_count: out.clamp_count,
        ic: information_criteria(loglik, n, k),
        n_obs: n,
    })
}

/// Inverts a symmetric positive definite matrix via Cholesky; `None` when the
/// factorization fails (numerically singular).
fn invert_spd(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if m.iter().any(|v| !v.is_finite()) {
        return None;
    }
    m.clone().cholesky().map(|ch| ch.inverse())
}

/// Regression-based starting values.
///
/// α and β come from least squares of g(Y_t) on (1, X_t); φ from least
/// squares of those regression residuals on their own p lags; θ starts at 0.
/// Singular regressions fall back to zeros with α = mean of g(Y_t).
pub fn default_start(data: &SeriesData, spec: &ModelSpec) -> Result<ParamVector> {
    if data.n_covariates() != spec.r {
        return Err(Error::Dimension(format!(
            "data has {} covariates, spec needs {}",
            data.n_covariates(),
            spec.r
        )));
    }
    let n = data.n();
    let (p, r) = (spec.p, spec.r);
    let z: Vec<f64> = data.y().iter().map(|&v| spec.link.g_raw(v)).collect();
    let z_mean = z.iter().sum::<f64>() / n as f64;

    let mut alpha = z_mean;
    let mut beta = vec![0.0; r];
    let mut resid = z.iter().map(|v| v - z_mean).collect::<Vec<f64>>();

    let design = DMatrix::from_fn(n, 1 + r, |t, j| {
        if j == 0 {
            1.0
        } else {
            data.covariate_row(t)[j - 1]
        }
    });
    let target = nalgebra::DVector::from_column_slice(&z);
    if let Some(coef) = least_squares(&design, &target) {
        alpha = coef[0];
        beta = coef.as_slice()[1..].to_vec();
        let fitted = &design * &coef;
        resid = (0..n).map(|t| z[t] - fitted[t]).collect();
    }

    let mut phi = vec![0.0; p];
    if p > 0 && n > 2 * p {
        let rows = n - p;
        let lag_design = DMatrix::from_fn(rows, p, |i, j| resid[i + p - 1 - j]);
        let lag_target = nalgebra::DVector::from_fn(rows, |i, _| resid[i + p]);
        if let Some(coef) = least_squares(&lag_design, &lag_target) {
            phi = coef.as_slice().to_vec();
        }
    }

    // the systematic component subtracts X'β inside the AR terms, so the
    // regression intercept maps to the model intercept through (1 − Σφ)
    let phi_sum: f64 = phi.iter().sum();
    alpha *= 1.0 - phi_sum;

    ParamVector::new(alpha, beta, phi, vec![0.0; spec.q])
}

fn least_squares(a: &DMatrix<f64>, b: &nalgebra::DVector<f64>) -> Option<nalgebra::DVector<f64>> {
    let svd = a.clone().svd(true, true);
    let sol = svd.solve(b, 1e-10).ok()?;
    sol.iter().all(|v| v.is_finite()).then_some(sol)
}
