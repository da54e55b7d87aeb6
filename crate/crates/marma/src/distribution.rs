//! The Matsuoka distribution on the open unit interval.
//!
//! A uniparametric absolutely continuous law on (0,1) with density
//!
//! ```text
//! f(x; p) = 2·√(−p³·ln(x)/π)·x^(p−1),   x ∈ (0,1), p > 0.
//! ```
//!
//! If X ~ M(p) then −ln(X) ~ Gamma(3/2, scale 1/p). That transform drives
//! everything here: the CDF is the upper tail of a gamma with shape 3/2, the
//! quantile function inverts it, and sampling draws the gamma exactly as the
//! sum of an exponential and half a squared standard normal. Moments are
//! E(X^k) = (p/(p+k))^(3/2); in particular the mean map u(p) = (p/(1+p))^(3/2)
//! and its inverse u⁻¹(μ) = μ^(2/3)/(1−μ^(2/3)) connect the shape to the
//! conditional mean in the regression model.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{gamma32_quantile, gamma32_sf, neg_ln, LN_PI};

/// Largest f64 strictly below 1.
pub(crate) const ONE_MINUS_ULP: f64 = 1.0 - f64::EPSILON / 2.0;

/// A value strictly inside the open interval (0,1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnitValue(f64);

impl UnitValue {
    /// Validates 0 < x < 1.
    pub fn new(x: f64) -> Result<Self> {
        if x > 0.0 && x < 1.0 {
            Ok(Self(x))
        } else {
            Err(Error::Domain(format!("value {x} is not in (0,1)")))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for UnitValue {
    type Error = Error;
    fn try_from(x: f64) -> Result<Self> {
        Self::new(x)
    }
}

/// The positive shape parameter p of the Matsuoka distribution.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatsuokaParam(f64);

impl MatsuokaParam {
    /// Validates p > 0 and finite.
    pub fn new(p: f64) -> Result<Self> {
        if p > 0.0 && p.is_finite() {
            Ok(Self(p))
        } else {
            Err(Error::Domain(format!("shape {p} must be positive and finite")))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// Log density ln f(x; p).
    pub fn log_pdf(self, x: UnitValue) -> f64 {
        log_pdf_raw(x.get(), self.0)
    }

    /// Density f(x; p).
    pub fn pdf(self, x: UnitValue) -> f64 {
        self.log_pdf(x).exp()
    }

    /// CDF, total on ℝ: 0 for x ≤ 0, 1 for x ≥ 1, and the regularized upper
    /// incomplete gamma Q(3/2, −p·ln x) in between.
    pub fn cdf(self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else {
            gamma32_sf(self.0 * neg_ln(x))
        }
    }

    /// Quantile function on \[0,1\], with F⁻¹(0) = 0 and F⁻¹(1) = 1.
    pub fn quantile(self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Domain(format!("quantile order {q} not in [0,1]")));
        }
        if q == 0.0 {
            return Ok(0.0);
        }
        if q == 1.0 {
            return Ok(1.0);
        }
        let t = gamma32_quantile(1.0 - q);
        Ok((-t / self.0).exp())
    }

    /// Draws one observation: X = exp(−G/p) with G ~ Gamma(3/2, 1) sampled
    /// exactly as Exp(1) + Z²/2.
    pub fn sample_one<R: Rng + ?Sized>(self, rng: &mut R) -> UnitValue {
        let e: f64 = rng.sample(Exp1);
        let z: f64 = rng.sample(StandardNormal);
        let g = e + 0.5 * z * z;
        let x = (-g / self.0).exp();
        UnitValue(x.clamp(f64::MIN_POSITIVE, ONE_MINUS_ULP))
    }

    /// Draws `count` observations. Identical stream state gives identical
    /// output.
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R, count: usize) -> Vec<UnitValue> {
        (0..count).map(|_| self.sample_one(rng)).collect()
    }

    /// k-th raw moment E(X^k) = (p/(p+k))^(3/2).
    pub fn moment(self, k: u32) -> f64 {
        let m = self.0 / (self.0 + f64::from(k));
        m * m.sqrt()
    }

    /// Mean u(p) = (p/(1+p))^(3/2).
    pub fn mean(self) -> f64 {
        self.moment(1)
    }

    /// Variance (p/(p+2))^(3/2) − (p/(p+1))³.
    pub fn variance(self) -> f64 {
        let m1 = self.0 / (self.0 + 1.0);
        self.moment(2) - m1 * m1 * m1
    }

    /// The mean map u(p) as a `UnitValue` (shape → mean).
    pub fn to_mean(self) -> UnitValue {
        UnitValue(self.mean().clamp(f64::MIN_POSITIVE, ONE_MINUS_ULP))
    }

    /// Inverse mean map u⁻¹(μ) = μ^(2/3)/(1−μ^(2/3)) (mean → shape).
    pub fn from_mean(mu: UnitValue) -> Self {
        Self(shape_from_mean_raw(mu.get()))
    }
}

/// ln f(x; p) without input validation; callers guarantee 0 < x < 1, p > 0.
#[inline]
pub(crate) fn log_pdf_raw(x: f64, p: f64) -> f64 {
    let nl = neg_ln(x);
    std::f64::consts::LN_2 + 1.5 * p.ln() - 0.5 * LN_PI + 0.5 * nl.ln() - (p - 1.0) * nl
}

/// u⁻¹(μ) computed through expm1 so that shapes stay accurate as μ → 1.
#[inline]
pub(crate) fn shape_from_mean_raw(mu: f64) -> f64 {
    let one_minus_m = -((2.0 / 3.0) * mu.ln()).exp_m1(); // 1 − μ^(2/3)
    (1.0 - one_minus_m) / one_minus_m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn p(v: f64) -> MatsuokaParam {
        MatsuokaParam::new(v).unwrap()
    }

    fn u(v: f64) -> UnitValue {
        UnitValue::new(v).unwrap()
    }

    // Tanh-sinh quadrature over (0,1); handles the endpoint singularities of
    // the density (x^(p-1) at 0, √(−ln x) at 1). Test-only oracle, independent
    // of the gamma-transform route used by the implementation.
    fn integrate_unit<F: Fn(f64) -> f64>(f: F) -> f64 {
        let mut h = 0.5_f64;
        let mut prev = f64::NAN;
        let mut val = 0.0;
        for _ in 0..10 {
            let n = (4.0 / h).ceil() as i64;
            let mut sum = 0.0;
            for i in -n..=n {
                let u = i as f64 * h;
                let s = std::f64::consts::FRAC_PI_2 * u.sinh();
                let x = 1.0 / (1.0 + (-2.0 * s).exp()); // sigmoid(2s)
                let w = std::f64::consts::FRAC_PI_2 * u.cosh() / (2.0 * s.cosh().powi(2));
                if x > 0.0 && x < 1.0 && w.is_finite() {
                    sum += w * f(x);
                }
            }
            val = sum * h;
            if (val - prev).abs() < 1e-12 * (1.0 + val.abs()) {
                break;
            }
            prev = val;
            h *= 0.5;
        }
        val
    }

    #[test]
    fn log_pdf_hand_value() {
        // x = e^{-1}, p = 1: f = 2/√π since −ln x = 1 and x^{p−1} = 1
        let v = p(1.0).log_pdf(u((-1.0f64).exp()));
        close(v, (2.0 / crate::special::SQRT_PI).ln(), 1e-14);
        close(v, 0.1207822376352452, 1e-12);
    }

    #[test]
    fn pdf_integrates_to_one() {
        for &shape in &[0.25, 1.0, 5.0, 50.0] {
            let total = integrate_unit(|x| p(shape).pdf(u(x)));
            close(total, 1.0, 1e-8);
        }
    }

    #[test]
    fn log_pdf_vanishes_at_upper_boundary() {
        // density → 0 as x → 1⁻ because of the √(−ln x) factor
        let shape = p(2.0);
        let mut last = shape.log_pdf(u(0.9));
        for &x in &[0.99, 0.9999, 1.0 - 1e-8, 1.0 - 1e-12] {
            let v = shape.log_pdf(u(x));
            assert!(v < last);
            last = v;
        }
        assert!(last < -10.0);
    }

    #[test]
    fn domain_errors() {
        assert!(UnitValue::new(0.0).is_err());
        assert!(UnitValue::new(1.0).is_err());
        assert!(UnitValue::new(f64::NAN).is_err());
        assert!(MatsuokaParam::new(0.0).is_err());
        assert!(MatsuokaParam::new(-1.0).is_err());
        assert!(MatsuokaParam::new(f64::INFINITY).is_err());
        assert!(p(1.0).quantile(-0.1).is_err());
        assert!(p(1.0).quantile(1.1).is_err());
    }

    #[test]
    fn cdf_boundaries_and_monotonicity() {
        let shape = p(3.0);
        assert_eq!(shape.cdf(-0.5), 0.0);
        assert_eq!(shape.cdf(0.0), 0.0);
        assert_eq!(shape.cdf(1.0), 1.0);
        assert_eq!(shape.cdf(2.0), 1.0);
        let mut last = 0.0;
        for i in 1..=999 {
            let v = shape.cdf(i as f64 / 1000.0);
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn cdf_reference_values() {
        // 30-digit reference values for Q(3/2, −p ln x)
        close(p(1.0).cdf(0.5), 0.7087505307993376, 1e-14);
        close(p(2.0).cdf(0.25), 0.13596133758865548, 1e-14);
        close(p(0.5).cdf(0.9), 0.9911864722176250, 1e-14);
    }

    #[test]
    fn cdf_at_gamma_median_is_half() {
        // t = median of Gamma(3/2, 1) from an external high-precision oracle
        let t_med = 1.1829869421876691_f64;
        close(p(1.0).cdf((-t_med).exp()), 0.5, 1e-13);
    }

    #[test]
    fn cdf_matches_integrated_pdf() {
        let shape = p(1.7);
        for &x0 in &[0.1, 0.3, 0.5, 0.8, 0.95] {
            // map tanh-sinh onto (0, x0)
            let integral = integrate_unit(|s| shape.pdf(u(s * x0)).min(f64::MAX) * x0);
            close(integral, shape.cdf(x0), 1e-7);
        }
    }

    #[test]
    fn quantile_boundaries_and_reference_values() {
        let one = p(1.0);
        assert_eq!(one.quantile(0.0).unwrap(), 0.0);
        assert_eq!(one.quantile(1.0).unwrap(), 1.0);
        // frozen 30-digit references
        close(one.quantile(0.5).unwrap(), 0.30636228415302713, 1e-13);
        close(one.quantile(0.1).unwrap(), 0.04390643811360743, 1e-14);
        close(one.quantile(0.9).unwrap(), 0.7466287636356667, 1e-13);
        close(p(5.0).quantile(0.5).unwrap(), 0.7893090089876270, 1e-13);
        close(p(0.25).quantile(0.01).unwrap(), 1.3995034143340043e-10, 1e-20);
        close(p(0.25).quantile(0.99).unwrap(), 0.7948009255500994, 1e-13);
    }

    #[test]
    fn quantile_agrees_with_bisection_on_cdf() {
        let shape = p(1.0);
        let target = 0.5;
        let (mut lo, mut hi) = (1e-12, 1.0 - 1e-12);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if shape.cdf(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        close(shape.quantile(target).unwrap(), 0.5 * (lo + hi), 1e-10);
    }

    #[test]
    fn cdf_quantile_round_trip() {
        for &shape in &[0.25, 1.0, 5.0, 50.0] {
            let d = p(shape);
            for i in 1..=99 {
                let q = i as f64 / 100.0;
                close(d.cdf(d.quantile(q).unwrap()), q, 1e-8);
            }
        }
    }

    #[test]
    fn quantile_strictly_increasing() {
        let d = p(2.5);
        let mut last = 0.0;
        for i in 1..=99 {
            let v = d.quantile(i as f64 / 100.0).unwrap();
            assert!(v > last, "not increasing at q = {}", i as f64 / 100.0);
            last = v;
        }
    }

    #[test]
    fn sampling_is_deterministic_given_seed() {
        let d = p(2.0);
        let a = d.sample(&mut substream(7, &[0]), 100);
        let b = d.sample(&mut substream(7, &[0]), 100);
        assert_eq!(a, b);
        assert!(a.iter().all(|v| v.get() > 0.0 && v.get() < 1.0));
    }

    #[test]
    fn sample_mean_matches_closed_form() {
        let d = p(2.0);
        let n = 1_000_000;
        let mut rng = substream(11, &[0]);
        let mean = (0..n).map(|_| d.sample_one(&mut rng).get()).sum::<f64>() / n as f64;
        let se = d.variance().sqrt() / (n as f64).sqrt();
        close(mean, d.mean(), 3.0 * se);
    }

    #[test]
    fn sample_log_mean_matches_gamma_transform() {
        // E(ln X) = −3/(2p), Var(ln X) = 3/(2p²)
        for &shape in &[0.5, 2.0] {
            let d = p(shape);
            let n = 200_000;
            let mut rng = substream(13, &[shape.to_bits()]);
            let mean = (0..n).map(|_| d.sample_one(&mut rng).get().ln()).sum::<f64>() / n as f64;
            let se = (1.5 / (shape * shape) / n as f64).sqrt();
            close(mean, -1.5 / shape, 3.0 * se);
        }
    }

    #[test]
    fn empirical_cdf_close_to_analytic() {
        let d = p(2.0);
        let n = 1_000_000;
        let mut rng = substream(17, &[0]);
        let mut xs: Vec<f64> = (0..n).map(|_| d.sample_one(&mut rng).get()).collect();
        xs.sort_unstable_by(f64::total_cmp);
        let mut ks: f64 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let f = d.cdf(x);
            ks = ks.max((f - i as f64 / n as f64).abs());
            ks = ks.max(((i + 1) as f64 / n as f64 - f).abs());
        }
        assert!(ks < 0.002, "KS distance {ks}");
    }

    #[test]
    fn moments_and_variance() {
        close(p(1.0).moment(1), 0.3535533905932738, 1e-15);
        close(p(2.0).mean(), 0.5443310539518174, 1e-15);
        assert!(p(1e6).variance() < 1e-6);
        assert!(p(1e6).variance() > 0.0);
        // mean strictly increasing in p on a log-spaced grid
        let mut last = 0.0;
        for i in 0..60 {
            let m = p(10f64.powf(-3.0 + 0.1 * i as f64)).mean();
            assert!(m > last);
            last = m;
        }
    }

    #[test]
    fn mean_shape_maps_are_mutual_inverses() {
        close(p(1.0).to_mean().get(), 0.3535533905932738, 1e-15);
        for &shape in &[0.1, 1.0, 10.0, 100.0] {
            let back = MatsuokaParam::from_mean(p(shape).to_mean()).get();
            assert!((back - shape).abs() <= 1e-12 * shape.max(1.0), "{back} vs {shape}");
        }
        // boundary behavior of u⁻¹
        assert!(shape_from_mean_raw(1.0 - 1e-12) > 1e8);
        assert!(shape_from_mean_raw(1e-12) < 1e-7);
    }

    #[test]
    fn mode_structure_by_shape() {
        // J-shaped (decreasing) for p ≤ 1, a single interior mode for p > 1
        for &shape in &[0.25, 0.6, 1.0] {
            let d = p(shape);
            let mut last = f64::INFINITY;
            for i in 1..2000 {
                let v = d.pdf(u(i as f64 / 2000.0));
                assert!(v < last, "interior rise at p = {shape}");
                last = v;
            }
        }
        for &shape in &[1.5, 5.0, 50.0] {
            let d = p(shape);
            let vals: Vec<f64> = (1..2000).map(|i| d.pdf(u(i as f64 / 2000.0))).collect();
            let mut rises_after_fall = 0;
            let mut falling = false;
            for w in vals.windows(2) {
                if w[1] < w[0] {
                    falling = true;
                } else if falling {
                    rises_after_fall += 1;
                    falling = false;
                }
            }
            assert_eq!(rises_after_fall, 0, "more than one mode at p = {shape}");
            assert!(vals.windows(2).any(|w| w[1] > w[0]), "no rise at p = {shape}");
        }
    }

    #[test]
    fn empirical_skewness_nonzero() {
        // the law is never symmetric about 1/2; check a skewness proxy
        let d = p(1.0);
        let mut rng = substream(23, &[0]);
        let xs: Vec<f64> = (0..100_000).map(|_| d.sample_one(&mut rng).get()).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let s2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
        let s3 = xs.iter().map(|x| (x - m).powi(3)).sum::<f64>() / xs.len() as f64;
        assert!((s3 / s2.powf(1.5)).abs() > 0.1);
    }

    proptest! {
        #[test]
        fn prop_round_trip_quantile_cdf(q in 0.001f64..0.999, lp in -1.0f64..2.0) {
            let d = p(10f64.powf(lp));
            let x = d.quantile(q).unwrap();
            prop_assert!((d.cdf(x) - q).abs() < 1e-8);
        }

        #[test]
        fn prop_log_pdf_finite(x in 1e-8f64..0.99999999, lp in -2.0f64..3.0) {
            let d = p(10f64.powf(lp));
            prop_assert!(d.log_pdf(u(x)).is_finite());
        }
    }
}
