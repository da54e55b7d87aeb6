//! Exact MARMA data generation with burn-in, plus the Monte Carlo harness
//! for point-estimation, goodness-of-fit and prediction-interval coverage
//! studies.
//!
//! Generation runs the systematic recursion forward and draws each Y_t from
//! the Matsuoka law at the conditional mean, discarding the first `burn_in`
//! steps. Covariates come from a declarative rule evaluated on the
//! post-truncation time index (so row s of the returned data always carries
//! the rule at time s; the burn-in segment extends the rule to times ≤ 0).
//! Burn-in innovations draw from a separate substream, which keeps the kept
//! window's draws identical when the burn-in length changes — burn-in
//! sufficiency is then directly measurable.
//!
//! Replica b of a study uses substreams derived from (seed, b); reports are
//! aggregated in replica order, so a report is a pure function of
//! (scenario, seed) at any parallelism degree.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{ad_normality, ks_normality, residuals};
use crate::distribution::{shape_from_mean_raw, MatsuokaParam};
use crate::error::{Error, Result};
use crate::estimation::{fit, FitOptions, FitResult};
use crate::forecast::bootstrap_intervals;
use crate::model::{ModelSpec, ParamVector, SeriesData};
use crate::rng::substream;

/// One harmonic covariate column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harmonic {
    pub kind: HarmonicKind,
    /// Period in time steps; the column is sin(2πt/period) or cos(2πt/period).
    pub period: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HarmonicKind {
    Sin,
    Cos,
}

impl Harmonic {
    pub fn value(&self, t: i64) -> f64 {
        let arg = 2.0 * std::f64::consts::PI * t as f64 / self.period;
        match self.kind {
            HarmonicKind::Sin => arg.sin(),
            HarmonicKind::Cos => arg.cos(),
        }
    }
}

/// Declarative covariate generator for simulations and forecast extension.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovariateRule {
    #[default]
    None,
    Harmonics(Vec<Harmonic>),
}

impl CovariateRule {
    pub fn n_covariates(&self) -> usize {
        match self {
            CovariateRule::None => 0,
            CovariateRule::Harmonics(h) => h.len(),
        }
    }

    /// Covariate row at (1-based) time t; t ≤ 0 extends the rule backwards.
    pub fn row(&self, t: i64) -> Vec<f64> {
        match self {
            CovariateRule::None => vec![],
            CovariateRule::Harmonics(h) => h.iter().map(|term| term.value(t)).collect(),
        }
    }

    /// Columns for times `start..start+len`.
    pub fn columns(&self, start: i64, len: usize) -> Vec<Vec<f64>> {
        let r = self.n_covariates();
        let mut cols = vec![Vec::with_capacity(len); r];
        for idx in 0..len {
            let row = self.row(start + idx as i64);
            for (l, v) in row.into_iter().enumerate() {
                cols[l].push(v);
            }
        }
        cols
    }
}

/// A data-generating configuration for one Monte Carlo study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub spec: ModelSpec,
    pub gamma: ParamVector,
    /// Kept sample size.
    pub n: usize,
    pub burn_in: usize,
    pub covariates: CovariateRule,
    /// Replica count for Monte Carlo studies.
    pub replicas: usize,
    pub seed: u64,
}

/// A simulated series along with its true conditional means.
#[derive(Debug, Clone)]
pub struct SimOutput {
    pub data: SeriesData,
    /// μ_t of the kept window (useful for conditional-mean checks).
    pub mu: Vec<f64>,
}

/// Simulates replica 0 of the scenario.
pub fn simulate(scenario: &ScenarioSpec) -> Result<SimOutput> {
    simulate_replica(scenario, 0)
}

/// Simulates the given replica; replicas are independent substreams of the
/// scenario seed.
pub fn simulate_replica(scenario: &ScenarioSpec, replica: usize) -> Result<SimOutput> {
    let spec = &scenario.spec;
    if scenario.covariates.n_covariates() != spec.r {
        return Err(Error::Dimension(format!(
            "covariate rule yields {} columns, spec needs {}",
            scenario.covariates.n_covariates(),
            spec.r
        )));
    }
    if scenario.n == 0 {
        return Err(Error::InvalidArgument("sample size must be positive".into()));
    }
    let (p, q) = (spec.p, spec.q);
    let link = spec.link;
    let gamma = &scenario.gamma;
    if gamma.beta.len() != spec.r || gamma.phi.len() != p || gamma.theta.len() != q {
        return Err(Error::Dimension("parameters do not match spec".into()));
    }
    let burn = scenario.burn_in;
    let total = burn + scenario.n;

    // burn-in and kept-window innovations come from separate substreams so
    // that changing the burn-in length does not shift the kept draws
    let b = replica as u64;
    let mut rng_burn = substream(scenario.seed, &[b, 0]);
    let mut rng_main = substream(scenario.seed, &[b, 1]);

    // covariate rows for generation steps 1..=total map to rule times
    // (1 - burn)..=n
    let x_rows: Vec<Vec<f64>> = (0..total)
        .map(|idx| scenario.covariates.row(idx as i64 + 1 - burn as i64))
        .collect();
    let xb: Vec<f64> = x_rows.iter().map(|row| dot(row, &gamma.beta)).collect();
    let mut xbar_beta = 0.0;
    if p > 0 && spec.r > 0 {
        let m = p.min(total);
        let mut xbar = vec![0.0; spec.r];
        for row in x_rows.iter().take(m) {
            for (l, v) in row.iter().enumerate() {
                xbar[l] += v / m as f64;
            }
        }
        xbar_beta = dot(&xbar, &gamma.beta);
    }

    let mut gy = vec![0.0; total];
    let mut rr = vec![0.0; total];
    let mut y = vec![0.0; total];
    let mut mu_path = vec![0.0; total];
    for t in 0..total {
        let mut eta = gamma.alpha + xb[t];
        for i in 1..=p {
            let (gy_lag, xb_lag) = if t >= i { (gy[t - i], xb[t - i]) } else { (0.0, xbar_beta) };
            eta += gamma.phi[i - 1] * (gy_lag - xb_lag);
        }
        for j in 1..=q {
            if t >= j {
                eta += gamma.theta[j - 1] * rr[t - j];
            }
        }
        if !eta.is_finite() {
            return Err(Error::NonFinite { quantity: "simulated eta", index: t });
        }
        let mu = link.g_inv(eta);
        let shape = MatsuokaParam::new(shape_from_mean_raw(mu))?;
        let rng = if t < burn { &mut rng_burn } else { &mut rng_main };
        let draw = shape.sample_one(rng).get();
        y[t] = draw;
        mu_path[t] = mu;
        gy[t] = link.g_raw(draw);
        rr[t] = gy[t] - eta;
    }

    let kept_y = y[burn..].to_vec();
    let cols = scenario.covariates.columns(1, scenario.n);
    Ok(SimOutput {
        data: SeriesData::new(kept_y, cols)?,
        mu: mu_path[burn..].to_vec(),
    })
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-parameter location/scale summary over replicas.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamStats {
    pub name: String,
    pub true_value: f64,
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
}

/// Estimate summaries, reported both over converged replicas only and over
/// all replicas that produced an iterate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McEstimates {
    pub converged: Vec<ParamStats>,
    pub all: Vec<ParamStats>,
}

/// Rejection rates of the residual normality tests at `level`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McGof {
    pub level: f64,
    pub ks_rejection_rate: f64,
    pub ad_rejection_rate: f64,
    pub n_used: usize,
}

/// Bootstrap interval coverage for one nominal level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelCoverage {
    /// Two-sided level δ; nominal coverage is 1 − δ.
    pub level: f64,
    /// Fraction of replicas whose interval covered the realized value, by
    /// horizon step.
    pub per_horizon: Vec<f64>,
    /// Mean coverage across horizons is at or above nominal.
    pub conservative: bool,
}

/// Coverage study summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McCoverage {
    pub horizon: usize,
    pub n_paths: usize,
    pub levels: Vec<LevelCoverage>,
}

/// Aggregated Monte Carlo report. Sections are present according to the
/// study that produced the report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McReport {
    pub n_replicas: usize,
    pub n_converged: usize,
    pub n_not_converged: usize,
    pub n_error: usize,
    pub seed: u64,
    pub estimates: Option<McEstimates>,
    pub gof: Option<McGof>,
    pub coverage: Option<McCoverage>,
}

fn summarize(
    spec: &ModelSpec,
    truth: &ParamVector,
    estimates: &[Vec<f64>],
) -> Vec<ParamStats> {
    let names = spec.param_names();
    let true_flat = truth.to_vec();
    let k = spec.n_params();
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let mut vals: Vec<f64> = estimates.iter().map(|e| e[j]).collect();
        let n = vals.len() as f64;
        let (mean, median, sd) = if vals.is_empty() {
            (f64::NAN, f64::NAN, f64::NAN)
        } else {
            let mean = vals.iter().sum::<f64>() / n;
            let sd = if vals.len() > 1 {
                (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            vals.sort_unstable_by(f64::total_cmp);
            let median = if vals.len() % 2 == 1 {
                vals[vals.len() / 2]
            } else {
                0.5 * (vals[vals.len() / 2 - 1] + vals[vals.len() / 2])
            };
            (mean, median, sd)
        };
        out.push(ParamStats {
            name: names[j].clone(),
            true_value: true_flat[j],
            mean,
            median,
            sd,
        });
    }
    out
}

enum ReplicaOutcome<T> {
    Converged(T),
    NotConverged(T),
    Error,
}

fn run_replicas<T: Send>(
    scenario: &ScenarioSpec,
    task: impl Fn(usize, SimOutput) -> Result<(FitResult, T)> + Sync,
) -> Vec<ReplicaOutcome<T>> {
    (0..scenario.replicas)
        .into_par_iter()
        .map(|b| {
            let sim = match simulate_replica(scenario, b) {
                Ok(s) => s,
                Err(_) => return ReplicaOutcome::Error,
            };
            match task(b, sim) {
                Ok((fitres, payload)) => {
                    if fitres.converged {
                        ReplicaOutcome::Converged(payload)
                    } else {
                        ReplicaOutcome::NotConverged(payload)
                    }
                }
                Err(_) => ReplicaOutcome::Error,
            }
        })
        .collect()
}

/// Point-estimation study: replicas of simulate + fit, summarized per
/// parameter (mean, median, SD), excluding non-converged fits from the
/// primary block and reporting an all-iterates block alongside.
pub fn mc_point_estimation(scenario: &ScenarioSpec, options: &FitOptions) -> Result<McReport> {
    let outcomes = run_replicas(scenario, |_, sim| {
        let f = fit(&sim.data, &scenario.spec, options)?;
        let flat = f.gamma_hat.to_vec();
        Ok((f, flat))
    });

    let mut converged = Vec::new();
    let mut all = Vec::new();
    let (mut n_conv, mut n_nc, mut n_err) = (0usize, 0usize, 0usize);
    for o in outcomes {
        match o {
            ReplicaOutcome::Converged(flat) => {
                n_conv += 1;
                converged.push(flat.clone());
                all.push(flat);
            }
            ReplicaOutcome::NotConverged(flat) => {
                n_nc += 1;
                all.push(flat);
            }
            ReplicaOutcome::Error => n_err += 1,
        }
    }

    Ok(McReport {
        n_replicas: scenario.replicas,
        n_converged: n_conv,
        n_not_converged: n_nc,
        n_error: n_err,
        seed: scenario.seed,
        estimates: Some(McEstimates {
            converged: summarize(&scenario.spec, &scenario.gamma, &converged),
            all: summarize(&scenario.spec, &scenario.gamma, &all),
        }),
        gof: None,
        coverage: None,
    })
}

/// Goodness-of-fit study: KS and AD rejection rates on quantile residuals at
/// the 5% level, over converged replicas.
pub fn mc_goodness_of_fit(scenario: &ScenarioSpec, options: &FitOptions) -> Result<McReport> {
    const LEVEL: f64 = 0.05;
    let outcomes = run_replicas(scenario, |_, sim| {
        let f = fit(&sim.data, &scenario.spec, options)?;
        let res = residuals(&f, &sim.data)?;
        let ks = ks_normality(&res.quantile)?;
        let ad = ad_normality(&res.quantile)?;
        Ok((f, (ks.p_value < LEVEL, ad.p_value < LEVEL)))
    });

    let (mut n_conv, mut n_nc, mut n_err) = (0usize, 0usize, 0usize);
    let (mut ks_rej, mut ad_rej) = (0usize, 0usize);
    for o in outcomes {
        match o {
            ReplicaOutcome::Converged((ks, ad)) => {
                n_conv += 1;
                ks_rej += ks as usize;
                ad_rej += ad as usize;
            }
            ReplicaOutcome::NotConverged(_) => n_nc += 1,
            ReplicaOutcome::Error => n_err += 1,
        }
    }
    if n_conv == 0 {
        return Err(Error::Degenerate("no converged replicas".into()));
    }

    Ok(McReport {
        n_replicas: scenario.replicas,
        n_converged: n_conv,
        n_not_converged: n_nc,
        n_error: n_err,
        seed: scenario.seed,
        estimates: None,
        gof: Some(McGof {
            level: LEVEL,
            ks_rejection_rate: ks_rej as f64 / n_conv as f64,
            ad_rejection_rate: ad_rej as f64 / n_conv as f64,
            n_used: n_conv,
        }),
        coverage: None,
    })
}

/// Coverage study: simulate n + h points, fit on the first n, build bootstrap
/// intervals at each level, and record whether the held-out values fall
/// inside.
pub fn mc_coverage(
    scenario: &ScenarioSpec,
    options: &FitOptions,
    horizon: usize,
    n_paths: usize,
    levels: &[f64],
) -> Result<McReport> {
    if horizon == 0 || levels.is_empty() {
        return Err(Error::InvalidArgument("empty coverage design".into()));
    }
    let mut extended = scenario.clone();
    extended.n = scenario.n + horizon;

    let seed = scenario.seed;
    let outcomes = run_replicas(&extended, |b, sim| {
        let train = sim.data.prefix(scenario.n)?;
        let f = fit(&train, &scenario.spec, options)?;
        let new_x: Vec<Vec<f64>> = (0..horizon)
            .map(|kstep| sim.data.covariate_row(scenario.n + kstep).to_vec())
            .collect();
        let held_out: Vec<f64> = sim.data.y()[scenario.n..].to_vec();
        // one set of paths per replica; intervals at every level reuse them
        let boot_seed = substream_seed(seed, b as u64);
        let fc = bootstrap_intervals(&f, &train, &new_x, horizon, n_paths, levels[0], boot_seed)?;
        let mut hits = vec![vec![false; horizon]; levels.len()];
        for (li, &delta) in levels.iter().enumerate() {
            for (kstep, (lo, hi)) in reuse_intervals(&fc, delta).into_iter().enumerate() {
                hits[li][kstep] = held_out[kstep] >= lo && held_out[kstep] <= hi;
            }
        }
        Ok((f, hits))
    });

    let (mut n_conv, mut n_nc, mut n_err) = (0usize, 0usize, 0usize);
    let mut counts = vec![vec![0usize; horizon]; levels.len()];
    for o in outcomes {
        match o {
            ReplicaOutcome::Converged(hits) => {
                n_conv += 1;
                for (li, row) in hits.iter().enumerate() {
                    for (kstep, &hit) in row.iter().enumerate() {
                        counts[li][kstep] += hit as usize;
                    }
                }
            }
            ReplicaOutcome::NotConverged(_) => n_nc += 1,
            ReplicaOutcome::Error => n_err += 1,
        }
    }
    if n_conv == 0 {
        return Err(Error::Degenerate("no converged replicas".into()));
    }

    let level_cov = levels
        .iter()
        .enumerate()
        .map(|(li, &delta)| {
            let per_horizon: Vec<f64> = counts[li]
                .iter()
                .map(|&c| c as f64 / n_conv as f64)
                .collect();
            let mean = per_horizon.iter().sum::<f64>() / horizon as f64;
            LevelCoverage {
                level: delta,
                per_horizon,
                conservative: mean >= 1.0 - delta,
            }
        })
        .collect();

    Ok(McReport {
        n_replicas: scenario.replicas,
        n_converged: n_conv,
        n_not_converged: n_nc,
        n_error: n_err,
        seed: scenario.seed,
        estimates: None,
        gof: None,
        coverage: Some(McCoverage { horizon, n_paths, levels: level_cov }),
    })
}

/// Seed for the bootstrap streams of replica b (kept distinct from the
/// simulate substreams of the same replica).
fn substream_seed(seed: u64, b: u64) -> u64 {
    use rand::Rng;
    substream(seed, &[b, 2]).random()
}

/// Recomputes interval endpoints at a new level from existing paths.
fn reuse_intervals(fc: &crate::forecast::ForecastResult, delta: f64) -> Vec<(f64, f64)> {
    use crate::forecast::empirical_quantile;
    let boot = fc.boot.as_ref().expect("paths present");
    let horizon = fc.horizon;
    let mut out = Vec::with_capacity(horizon);
    let mut column = vec![0.0f64; boot.len()];
    for kstep in 0..horizon {
        for (b, path) in boot.iter().enumerate() {
            column[b] = path[kstep];
        }
        column.sort_unstable_by(f64::total_cmp);
        out.push((
            empirical_quantile(&column, delta / 2.0),
            empirical_quantile(&column, 1.0 - delta / 2.0),
        ));
    }
    out
}
