//! In-sample fitted values, h-step point forecasts, in-sample intervals for
//! μ_t and bootstrap prediction intervals.
//!
//! The forecast recursion extends the filter past the sample: observed values
//! feed the recursion for t ≤ n, forecasts Ŷ_t = μ̂_t replace them for t > n,
//! and the working residual r̂_t is zero outside 1 ≤ t ≤ n.
//!
//! Bootstrap prediction intervals re-run the forecast recursion m times,
//! drawing each future observation from the fitted conditional Matsuoka law
//! and feeding the drawn value and its residual back into the recursion, so
//! the paths carry the dependence structure of the model. Interval endpoints
//! are empirical quantiles across paths (type-7 linear interpolation). Path
//! b draws from the substream (seed, b), so results are reproducible and
//! independent of scheduling order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::MatsuokaParam;
use crate::error::{Error, Result};
use crate::estimation::FitResult;
use crate::link::INV_LINK_EPS;
use crate::model::{filter, FilterOutput, SeriesData};
use crate::rng::substream;
use crate::special::norm_quantile;

/// Point forecasts plus (optionally) bootstrap paths and intervals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForecastResult {
    pub horizon: usize,
    /// μ̂_{n+1..n+h}.
    pub point: Vec<f64>,
    /// m×h bootstrap draws Ŷ^{(b)}_{n+k}; present iff intervals are.
    pub boot: Option<Vec<Vec<f64>>>,
    /// Per-step (lower, upper) interval at `level`.
    pub intervals: Option<Vec<(f64, f64)>>,
    /// Two-sided interval level δ.
    pub level: Option<f64>,
    /// Seed used for the bootstrap streams.
    pub seed: Option<u64>,
    /// Paths whose conditional mean hit the clamp bounds (counted, not fatal).
    pub boot_clamp_count: usize,
}

/// Validated future covariate rows.
fn check_new_x(new_x: &[Vec<f64>], r: usize, horizon: usize) -> Result<()> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    if r == 0 {
        return Ok(());
    }
    if new_x.len() < horizon {
        return Err(Error::InvalidArgument(format!(
            "need {horizon} future covariate rows, got {}",
            new_x.len()
        )));
    }
    for (i, row) in new_x.iter().take(horizon).enumerate() {
        if row.len() != r {
            return Err(Error::Dimension(format!(
                "future covariate row {i} has length {}, expected {r}",
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite future covariate in row {i}")));
        }
    }
    Ok(())
}

/// Shared state for the forward recursion beyond the sample.
struct ForecastState<'a> {
    fit: &'a FitResult,
    data: &'a SeriesData,
    new_x: &'a [Vec<f64>],
    /// g(Y_t) for the sample.
    gy: Vec<f64>,
    /// X_t'β over the sample.
    xb: Vec<f64>,
    /// X̄'β pre-sample value.
    xbar_beta: f64,
    /// In-sample working residuals.
    rr: Vec<f64>,
}

impl<'a> ForecastState<'a> {
    fn new(fit: &'a FitResult, data: &'a SeriesData, new_x: &'a [Vec<f64>]) -> Result<Self> {
        let out: FilterOutput = filter(&fit.gamma_hat, data, &fit.spec)?;
        let link = fit.spec.link;
        let n = data.n();
        let (p, r) = (fit.spec.p, fit.spec.r);
        let gy: Vec<f64> = data.y().iter().map(|&v| link.g_raw(v)).collect();
        let beta = &fit.gamma_hat.beta;
        let xb: Vec<f64> = (0..n)
            .map(|t| dot(data.covariate_row(t), beta))
            .collect();
        let mut xbar = vec![0.0; r];
        if p > 0 && r > 0 {
            let m = p.min(n);
            for t in 0..m {
                for (l, v) in data.covariate_row(t).iter().enumerate() {
                    xbar[l] += v / m as f64;
                }
            }
        }
        Ok(Self {
            fit,
            data,
            new_x,
            gy,
            xb,
            xbar_beta: dot(&xbar, beta),
            rr: out.resid_r,
        })
    }

    fn n(&self) -> usize {
        self.data.n()
    }

    /// X_t'β for any (0-based) recursion index, future rows included.
    fn xb_at(&self, t: i64) -> f64 {
        if self.fit.spec.r == 0 {
            return 0.0;
        }
        let n = self.n() as i64;
        if t < 0 {
            self.xbar_beta
        } else if t < n {
            self.xb[t as usize]
        } else {
            dot(&self.new_x[(t - n) as usize], &self.fit.gamma_hat.beta)
        }
    }

    /// One step of the forecast recursion at 0-based index t ≥ n.
    ///
    /// `future_gy[k]` and `future_rr[k]` hold g(Ŷ_{n+k+1}) and r̂_{n+k+1} for
    /// the already-extended steps.
    fn step(&self, t: usize, future_gy: &[f64], future_rr: &[f64]) -> f64 {
        let n = self.n();
        let gamma = &self.fit.gamma_hat;
        let mut eta = gamma.alpha + self.xb_at(t as i64);
        for i in 1..=self.fit.spec.p {
            let lag = t as i64 - i as i64;
            let gy_lag = if lag < 0 {
                0.0
            } else if (lag as usize) < n {
                self.gy[lag as usize]
            } else {
                future_gy[lag as usize - n]
            };
            eta += gamma.phi[i - 1] * (gy_lag - self.xb_at(lag));
        }
        for j in 1..=self.fit.spec.q {
            let lag = t as i64 - j as i64;
            let r_lag = if lag < 0 {
                0.0
            } else if (lag as usize) < n {
                self.rr[lag as usize]
            } else {
                future_rr[lag as usize - n]
            };
            eta += gamma.theta[j - 1] * r_lag;
        }
        eta
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// h-step point forecasts μ̂_{n+1..n+h}.
pub fn predict(
    fit: &FitResult,
    data: &SeriesData,
    new_x: &[Vec<f64>],
    horizon: usize,
) -> Result<ForecastResult> {
    check_new_x(new_x, fit.spec.r, horizon)?;
    let state = ForecastState::new(fit, data, new_x)?;
    let link = fit.spec.link;
    let n = data.n();
    let mut point = Vec::with_capacity(horizon);
    let mut future_gy = Vec::with_capacity(horizon);
    let future_rr = vec![0.0; horizon];
    for kstep in 0..horizon {
        let eta = state.step(n + kstep, &future_gy, &future_rr);
        if !eta.is_finite() {
            return Err(Error::NonFinite { quantity: "forecast eta", index: n + kstep });
        }
        let mu = link.g_inv(eta);
        point.push(mu);
        // forecasts feed back through g(Ŷ) = g(μ̂)
        future_gy.push(link.g_raw(mu));
    }
    Ok(ForecastResult {
        horizon,
        point,
        boot: None,
        intervals: None,
        level: None,
        seed: None,
        boot_clamp_count: 0,
    })
}

/// Approximate level-δ in-sample interval for μ_t (0-based index), from the
/// delta method on the normalized conditional information:
/// μ̂_t ± z_{1−δ/2}·√(d_t' (K_n/n)⁻¹ d_t / n) / g′(μ̂_t), clipped to (0,1).
pub fn insample_interval(
    fit: &FitResult,
    data: &SeriesData,
    t: usize,
    delta: f64,
) -> Result<(f64, f64)> {
    if t >= data.n() {
        return Err(Error::Dimension(format!(
            "index {t} out of range for series of length {}",
            data.n()
        )));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!("level {delta} not in (0,1]")));
    }
    let cov = fit.covariance.as_ref().ok_or(Error::SingularInformation)?;
    let out = filter(&fit.gamma_hat, data, &fit.spec)?;
    let k = fit.spec.n_params();
    let d = out.deriv.row(t);
    let mut quad = 0.0;
    for a in 0..k {
        for b in 0..k {
            quad += d[a] * cov[(a, b)] * d[b];
        }
    }
    let mult = norm_quantile(1.0 - delta / 2.0);
    let half = mult * quad.max(0.0).sqrt() / fit.spec.link.g_prime_raw(out.mu[t]);
    let lo = (out.mu[t] - half).clamp(INV_LINK_EPS, 1.0 - INV_LINK_EPS);
    let hi = (out.mu[t] + half).clamp(INV_LINK_EPS, 1.0 - INV_LINK_EPS);
    Ok((lo, hi))
}

/// Bootstrap prediction intervals.
///
/// Draws `n_paths` forecast paths from the fitted model (each future value
/// sampled from the Matsuoka law at the path's conditional mean, residuals
/// fed back through the recursion) and returns per-step empirical δ/2 and
/// 1−δ/2 quantiles together with the point forecast.
pub fn bootstrap_intervals(
    fit: &FitResult,
    data: &SeriesData,
    new_x: &[Vec<f64>],
    horizon: usize,
    n_paths: usize,
    delta: f64,
    seed: u64,
) -> Result<ForecastResult> {
    if n_paths < 50 {
        return Err(Error::InvalidArgument(format!(
            "need at least 50 bootstrap paths, got {n_paths}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("level {delta} not in (0,1)")));
    }
    let mut result = predict(fit, data, new_x, horizon)?;
    let state = ForecastState::new(fit, data, new_x)?;
    let link = fit.spec.link;
    let n = data.n();
    let mu_next = result.point[0];

    let paths: Vec<(Vec<f64>, usize)> = (0..n_paths)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(seed, &[b as u64]);
            let mut draws = Vec::with_capacity(horizon);
            let mut future_gy = Vec::with_capacity(horizon);
            let mut future_rr = Vec::with_capacity(horizon);
            let mut clamps = 0usize;
            for kstep in 0..horizon {
                let mu = if kstep == 0 {
                    mu_next
                } else {
                    let eta = state.step(n + kstep, &future_gy, &future_rr);
                    link.g_inv(eta)
                };
                if mu <= INV_LINK_EPS || mu >= 1.0 - INV_LINK_EPS {
                    clamps += 1;
                }
                let shape =
                    MatsuokaParam::new(crate::distribution::shape_from_mean_raw(mu))
                        .expect("clamped mean maps to a valid shape");
                let y = shape.sample_one(&mut rng).get();
                draws.push(y);
                future_gy.push(link.g_raw(y));
                future_rr.push(link.g_raw(y) - link.g_raw(mu));
            }
            (draws, clamps)
        })
        .collect();

    let mut boot = Vec::with_capacity(n_paths);
    let mut clamp_total = 0usize;
    for (draws, clamps) in paths {
        boot.push(draws);
        clamp_total += clamps;
    }

    let mut intervals = Vec::with_capacity(horizon);
    let mut column = vec![0.0f64; n_paths];
    for kstep in 0..horizon {
        for (b, path) in boot.iter().enumerate() {
            column[b] = path[kstep];
        }
        column.sort_unstable_by(f64::total_cmp);
        intervals.push((
            empirical_quantile(&column, delta / 2.0),
            empirical_quantile(&column, 1.0 - delta / 2.0),
        ));
    }

    result.boot = Some(boot);
    result.intervals = Some(intervals);
    result.level = Some(delta);
    result.seed = Some(seed);
    result.boot_clamp_count = clamp_total;
    Ok(result)
}

/// Type-7 empirical quantile (linear interpolation of order statistics) of a
/// sorted sample.
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{fit, FitOptions};
    use crate::link::Link;
    use crate::model::{ModelSpec, ParamVector};
    use crate::simulation::{simulate_replica, CovariateRule, ScenarioSpec};

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn fitted_marma11(n: usize, seed: u64) -> (FitResult, SeriesData) {
        let spec = ModelSpec::new(1, 1, 0, Link::Cloglog);
        let scenario = ScenarioSpec {
            spec,
            gamma: ParamVector::new(0.8, vec![], vec![0.3], vec![-0.2]).unwrap(),
            n,
            burn_in: 100,
            covariates: CovariateRule::None,
            replicas: 1,
            seed,
        };
        let sim = simulate_replica(&scenario, 0).unwrap();
        let fitted = fit(&sim.data, &spec, &FitOptions::default()).unwrap();
        (fitted, sim.data)
    }

    #[test]
    fn static_model_forecast_ignores_history() {
        let spec = ModelSpec::new(0, 0, 1, Link::Logit);
        let xs: Vec<f64> = (0..60).map(|t| ((t as f64) * 0.3).sin()).collect();
        let y: Vec<f64> = xs.iter().map(|&x| Link::Logit.g_inv(0.2 + 0.5 * x)).collect();
        let data = SeriesData::new(y, vec![xs]).unwrap();
        let fitted = fit(&data, &spec, &FitOptions::default()).unwrap();
        let new_x = vec![vec![0.4], vec![-0.9]];
        let fc = predict(&fitted, &data, &new_x, 2).unwrap();
        for (kstep, row) in new_x.iter().enumerate() {
            let expected = Link::Logit
                .g_inv(fitted.gamma_hat.alpha + fitted.gamma_hat.beta[0] * row[0]);
            close(fc.point[kstep], expected, 1e-12);
        }
    }

    #[test]
    fn ar1_two_step_hand_recursion() {
        let spec = ModelSpec::new(1, 0, 0, Link::Cloglog);
        let scenario = ScenarioSpec {
            spec,
            gamma: ParamVector::new(0.5, vec![], vec![0.3], vec![]).unwrap(),
            n: 300,
            burn_in: 100,
            covariates: CovariateRule::None,
            replicas: 1,
            seed: 5,
        };
        let sim = simulate_replica(&scenario, 0).unwrap();
        let fitted = fit(&sim.data, &spec, &FitOptions::default()).unwrap();
        let fc = predict(&fitted, &sim.data, &[], 2).unwrap();
        let g = Link::Cloglog;
        let (a, phi) = (fitted.gamma_hat.alpha, fitted.gamma_hat.phi[0]);
        let y_n = *sim.data.y().last().unwrap();
        let mu1 = g.g_inv(a + phi * g.g(y_n).unwrap());
        let mu2 = g.g_inv(a + phi * g.g(mu1).unwrap());
        close(fc.point[0], mu1, 1e-12);
        close(fc.point[1], mu2, 1e-12);
    }

    #[test]
    fn missing_future_covariates_error() {
        let spec = ModelSpec::new(0, 0, 1, Link::Logit);
        let xs: Vec<f64> = (0..40).map(|t| (t as f64 * 0.2).cos()).collect();
        let y: Vec<f64> = xs.iter().map(|&x| Link::Logit.g_inv(0.1 + 0.3 * x)).collect();
        let data = SeriesData::new(y, vec![xs]).unwrap();
        let fitted = fit(&data, &spec, &FitOptions::default()).unwrap();
        assert!(predict(&fitted, &data, &[], 2).is_err());
        assert!(predict(&fitted, &data, &[vec![0.0], vec![0.0]], 0).is_err());
    }

    #[test]
    fn insample_interval_degenerate_level() {
        let (fitted, data) = fitted_marma11(300, 17);
        let (lo, hi) = insample_interval(&fitted, &data, 150, 1.0).unwrap();
        close(lo, hi, 1e-12);
        let (lo2, hi2) = insample_interval(&fitted, &data, 150, 0.05).unwrap();
        assert!(lo2 < lo && hi2 > hi);
        assert!(lo2 > 0.0 && hi2 < 1.0);
    }

    #[test]
    fn bootstrap_is_deterministic_and_inside_unit_interval() {
        let (fitted, data) = fitted_marma11(250, 23);
        let a = bootstrap_intervals(&fitted, &data, &[], 5, 100, 0.1, 99).unwrap();
        let b = bootstrap_intervals(&fitted, &data, &[], 5, 100, 0.1, 99).unwrap();
        assert_eq!(a.boot, b.boot);
        assert_eq!(a.intervals, b.intervals);
        for path in a.boot.as_ref().unwrap() {
            for &v in path {
                assert!(v > 0.0 && v < 1.0);
            }
        }
        // intervals bracket the point forecast here
        for (kstep, &(lo, hi)) in a.intervals.as_ref().unwrap().iter().enumerate() {
            assert!(lo <= hi);
            assert!(a.point[kstep] > lo && a.point[kstep] < hi);
        }
    }

    #[test]
    fn bootstrap_requires_minimum_paths() {
        let (fitted, data) = fitted_marma11(200, 29);
        assert!(bootstrap_intervals(&fitted, &data, &[], 3, 10, 0.1, 1).is_err());
    }

    #[test]
    fn one_step_bootstrap_mean_matches_point() {
        let (fitted, data) = fitted_marma11(300, 31);
        let m = 20_000;
        let fc = bootstrap_intervals(&fitted, &data, &[], 1, m, 0.1, 7).unwrap();
        let draws: Vec<f64> = fc.boot.as_ref().unwrap().iter().map(|p| p[0]).collect();
        let mean = draws.iter().sum::<f64>() / m as f64;
        let sd = (draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m as f64).sqrt();
        close(mean, fc.point[0], 3.0 * sd / (m as f64).sqrt());
    }

    #[test]
    fn nested_levels_give_nested_intervals() {
        let (fitted, data) = fitted_marma11(250, 37);
        let wide = bootstrap_intervals(&fitted, &data, &[], 4, 400, 0.01, 5).unwrap();
        let narrow = bootstrap_intervals(&fitted, &data, &[], 4, 400, 0.10, 5).unwrap();
        for k in 0..4 {
            let (wl, wu) = wide.intervals.as_ref().unwrap()[k];
            let (nl, nu) = narrow.intervals.as_ref().unwrap()[k];
            assert!(wl <= nl && nu <= wu, "not nested at step {k}");
        }
    }

    #[test]
    fn empirical_quantile_type7() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(empirical_quantile(&v, 0.0), 1.0);
        assert_eq!(empirical_quantile(&v, 1.0), 4.0);
        close(empirical_quantile(&v, 0.5), 2.5, 1e-15);
        close(empirical_quantile(&v, 1.0 / 3.0), 2.0, 1e-12);
    }
}
