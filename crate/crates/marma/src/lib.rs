//! MARMA: Matsuoka autoregressive moving average models for time series
//! taking values in the open unit interval (0,1).
//!
//! The model is observation-driven: conditionally on the past, each
//! observation follows a Matsuoka distribution whose mean `μ_t` is linked to
//! an ARMA-like linear predictor
//!
//! ```text
//! g(μ_t) = η_t = α + X_t'β + Σ φ_i [g(Y_{t-i}) - X_{t-i}'β] + Σ θ_j r_{t-j},
//! r_t = g(Y_t) - η_t,
//! ```
//!
//! where `g` is a link function (logit, cloglog or loglog) and `X_t` are
//! optional covariates. The crate provides:
//!
//! - [`distribution`]: the Matsuoka distribution (density, CDF, quantile,
//!   exact sampling, moments, mean/shape maps);
//! - [`link`]: link functions with inverses and derivatives;
//! - [`model`]: the recursive filter, analytic score and conditional
//!   information matrix;
//! - [`estimation`]: partial maximum likelihood fitting with standard errors
//!   and information criteria;
//! - [`diagnostics`]: simple and quantile residuals, normality tests, Wald
//!   tests and confidence intervals;
//! - [`forecast`]: h-step point forecasts, in-sample intervals and bootstrap
//!   prediction intervals;
//! - [`simulation`]: exact data generation and a Monte Carlo harness for
//!   estimator, goodness-of-fit and coverage studies.
//!
//! # Example
//!
//! ```
//! use marma::link::Link;
//! use marma::model::{ModelSpec, ParamVector};
//! use marma::simulation::{CovariateRule, ScenarioSpec, simulate};
//! use marma::estimation::{fit, FitOptions};
//!
//! let spec = ModelSpec::new(1, 1, 0, Link::Cloglog);
//! let gamma = ParamVector::new(0.5, vec![], vec![0.2], vec![-0.4]).unwrap();
//! let scenario = ScenarioSpec {
//!     spec,
//!     gamma,
//!     n: 400,
//!     burn_in: 100,
//!     covariates: CovariateRule::None,
//!     replicas: 1,
//!     seed: 42,
//! };
//! let sim = simulate(&scenario).unwrap();
//! let fitted = fit(&sim.data, &spec, &FitOptions::default()).unwrap();
//! assert!(fitted.converged);
//! ```

pub mod diagnostics;
pub mod distribution;
pub mod error;
pub mod estimation;
pub mod forecast;
pub mod link;
pub mod model;
mod optim;
pub mod rng;
pub mod simulation;
pub mod special;

pub use error::{Error, Result};
