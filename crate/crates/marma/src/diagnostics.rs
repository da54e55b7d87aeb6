//! Residuals, normality-based goodness-of-fit, Wald tests, confidence
//! intervals and residual autocorrelations.
//!
//! Quantile residuals Φ⁻¹(F(Y_t; p̂_t)) are standard normal under correct
//! specification, so the KS and AD tests here target the fully specified
//! N(0,1) null — mean and variance are not re-estimated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::FitResult;
use crate::model::{filter, SeriesData};
use crate::special::{norm_cdf, norm_quantile};

/// Simple and quantile residuals of a fitted model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualSet {
    /// e_t = Y_t − μ̂_t.
    pub simple: Vec<f64>,
    /// Φ⁻¹(F(Y_t; p̂_t)).
    pub quantile: Vec<f64>,
    /// How many CDF values had to be clamped away from 0/1 before Φ⁻¹.
    pub cdf_clamp_count: usize,
}

/// Clamp bound applied to CDF values before the normal quantile.
const CDF_EPS: f64 = 1e-12;

/// Computes simple and quantile residuals at the fitted parameters.
pub fn residuals(fit: &FitResult, data: &SeriesData) -> Result<ResidualSet> {
    let out = filter(&fit.gamma_hat, data, &fit.spec)?;
    let mut simple = Vec::with_capacity(data.n());
    let mut quantile = Vec::with_capacity(data.n());
    let mut clamped = 0usize;
    for (t, &y) in data.y().iter().enumerate() {
        simple.push(y - out.mu[t]);
        let param = crate::distribution::MatsuokaParam::new(out.shape[t])?;
        let mut u = param.cdf(y);
        if u < CDF_EPS || u > 1.0 - CDF_EPS {
            u = u.clamp(CDF_EPS, 1.0 - CDF_EPS);
            clamped += 1;
        }
        quantile.push(norm_quantile(u));
    }
    Ok(ResidualSet { simple, quantile, cdf_clamp_count: clamped })
}

/// Statistic and p-value of a goodness-of-fit test.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GofTest {
    pub statistic: f64,
    pub p_value: f64,
}

const MIN_GOF_LEN: usize = 8;

/// One-sample Kolmogorov-Smirnov test of standard normality.
///
/// The p-value uses the asymptotic Kolmogorov distribution with Stephens'
/// finite-sample adjustment (√n + 0.12 + 0.11/√n)·D.
pub fn ks_normality(z: &[f64]) -> Result<GofTest> {
    let n = check_gof_input(z)?;
    let mut sorted = z.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &v) in sorted.iter().enumerate() {
        let f = norm_cdf(v);
        d = d.max(f - i as f64 / nf);
        d = d.max((i + 1) as f64 / nf - f);
    }
    let lambda = (nf.sqrt() + 0.12 + 0.11 / nf.sqrt()) * d;
    Ok(GofTest { statistic: d, p_value: kolmogorov_sf(lambda) })
}

/// One-sample Anderson-Darling test of standard normality.
///
/// The p-value comes from the Marsaglia & Marsaglia evaluation of the A²
/// null distribution (asymptotic CDF plus finite-n correction).
pub fn ad_normality(z: &[f64]) -> Result<GofTest> {
    let n = check_gof_input(z)?;
    let mut sorted = z.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let nf = n as f64;
    let mut s = 0.0;
    for i in 0..n {
        // ln(1−Φ(x)) computed as ln(Φ(−x)) to stay accurate in the tails
        let u_i = norm_cdf(sorted[i]).max(1e-300);
        let comp = norm_cdf(-sorted[n - 1 - i]).max(1e-300);
        s += (2.0 * i as f64 + 1.0) * (u_i.ln() + comp.ln());
    }
    let a2 = -nf - s / nf;
    let p = 1.0 - anderson_darling_cdf(n, a2);
    Ok(GofTest { statistic: a2, p_value: p.clamp(0.0, 1.0) })
}

fn check_gof_input(z: &[f64]) -> Result<usize> {
    if z.len() < MIN_GOF_LEN {
        return Err(Error::Degenerate(format!(
            "need at least {MIN_GOF_LEN} residuals, got {}",
            z.len()
        )));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite residual".into()));
    }
    Ok(z.len())
}

/// Upper tail of the Kolmogorov distribution: Q(λ) = 2Σ (−1)^{j−1} e^{−2j²λ²}.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j as f64).powi(2) * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-14 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Asymptotic CDF of the Anderson-Darling statistic (Marsaglia & Marsaglia).
fn ad_inf(z: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    if z < 2.0 {
        (-1.2337141 / z).exp() / z.sqrt()
            * (2.00012
                + (0.247105
                    - (0.0649821 - (0.0347962 - (0.011672 - 0.00168691 * z) * z) * z) * z)
                    * z)
    } else {
        (-(1.0776 - (2.30695 - (0.43424 - (0.082433 - (0.008056 - 0.0003146 * z) * z) * z) * z) * z)
            .exp())
        .exp()
    }
}

/// Finite-n corrected CDF of A² (Marsaglia & Marsaglia error fix).
fn anderson_darling_cdf(n: usize, z: f64) -> f64 {
    let x = ad_inf(z);
    let nf = n as f64;
    let fix = if x > 0.8 {
        (-130.2137 + (745.2337 - (1705.091 - (1950.646 - (1116.360 - 255.7844 * x) * x) * x) * x) * x)
            / nf
    } else {
        let c = 0.01265 + 0.1757 / nf;
        if x < c {
            let t = x / c;
            let t = t.sqrt() * (1.0 - t) * (49.0 * t - 102.0);
            t * (0.0037 / (nf * nf) + 0.00078 / nf + 0.00006) / nf
        } else {
            let t = (x - c) / (0.8 - c);
            let t = -0.00022633
                + (6.54034 - (14.6538 - (14.458 - (8.259 - 1.91864 * t) * t) * t) * t) * t;
            t * (0.04213 + 0.01365 / nf) / nf
        }
    };
    (x + fix).clamp(0.0, 1.0)
}

/// A Wald z test of H₀: γ_j = γ*.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WaldTest {
    pub z: f64,
    pub p_value: f64,
}

/// Tests H₀: γ_j = `gamma_star` using z = (γ̂_j − γ*)/se_j with a two-sided
/// normal p-value.
pub fn wald_test(fit: &FitResult, j: usize, gamma_star: f64) -> Result<WaldTest> {
    let k = fit.spec.n_params();
    if j >= k {
        return Err(Error::Dimension(format!("parameter index {j} out of range 0..{k}")));
    }
    let stderr = fit.stderr.as_ref().ok_or(Error::SingularInformation)?;
    let z = (fit.gamma_hat.to_vec()[j] - gamma_star) / stderr[j];
    let p_value = libm::erfc(z.abs() * std::f64::consts::FRAC_1_SQRT_2);
    Ok(WaldTest { z, p_value })
}

/// Level-δ Wald confidence intervals γ̂_j ± z_{1−δ/2}·se_j for every
/// parameter.
pub fn confint(fit: &FitResult, delta: f64) -> Result<Vec<(f64, f64)>> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("level {delta} not in (0,1)")));
    }
    let stderr = fit.stderr.as_ref().ok_or(Error::SingularInformation)?;
    let mult = norm_quantile(1.0 - delta / 2.0);
    Ok(fit
        .gamma_hat
        .to_vec()
        .iter()
        .zip(stderr)
        .map(|(&est, &se)| (est - mult * se, est + mult * se))
        .collect())
}

/// Sample autocorrelations with a white-noise reference band.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Acf {
    /// Autocorrelations at lags 0..=max_lag (lag 0 is 1 by convention).
    pub values: Vec<f64>,
    /// ±1.96/√n white-noise band.
    pub band: f64,
}

/// Sample autocorrelation function of `z` up to `max_lag`.
pub fn residual_acf(z: &[f64], max_lag: usize) -> Result<Acf> {
    let n = z.len();
    if n < 2 || max_lag >= n / 2 {
        return Err(Error::InvalidArgument(format!(
            "max_lag {max_lag} too large for series of length {n}"
        )));
    }
    let mean = z.iter().sum::<f64>() / n as f64;
    let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    if var == 0.0 {
        return Err(Error::Degenerate("constant residuals".into()));
    }
    let mut values = Vec::with_capacity(max_lag + 1);
    for lag in 0..=max_lag {
        let cov: f64 = (lag..n).map(|t| (z[t] - mean) * (z[t - lag] - mean)).sum();
        values.push(cov / var);
    }
    Ok(Acf { values, band: 1.96 / (n as f64).sqrt() })
}
