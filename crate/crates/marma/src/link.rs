//! Link functions mapping the open unit interval onto the real line.
//!
//! All three links are strictly increasing and twice continuously
//! differentiable on (0,1):
//!
//! | link    | g(x)             | g⁻¹(η)            | g′(x)              |
//! |---------|------------------|--------------------|--------------------|
//! | logit   | ln(x/(1−x))      | 1/(1+e^{−η})       | 1/(x(1−x))         |
//! | cloglog | ln(−ln(1−x))     | 1−e^{−e^η}         | −1/((1−x)ln(1−x))  |
//! | loglog  | −ln(−ln(x))      | e^{−e^{−η}}        | −1/(x·ln(x))       |
//!
//! `g_inv` is total on finite η: its output is clamped into
//! `[INV_LINK_EPS, 1 − INV_LINK_EPS]` so that downstream likelihood terms
//! stay finite; the filter counts clamp events and surfaces them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::neg_ln;

/// Clamp bound for `g_inv` output: 2⁻⁴⁸.
pub const INV_LINK_EPS: f64 = 1.0 / 281_474_976_710_656.0;

/// Link function selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Logit,
    Cloglog,
    Loglog,
}

impl Link {
    /// g(x) for x in (0,1).
    pub fn g(self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::Domain(format!("link argument {x} not in (0,1)")));
        }
        Ok(self.g_raw(x))
    }

    #[inline]
    pub(crate) fn g_raw(self, x: f64) -> f64 {
        match self {
            Link::Logit => x.ln() - (-x).ln_1p(),
            Link::Cloglog => (-(-x).ln_1p()).ln(),
            Link::Loglog => -neg_ln(x).ln(),
        }
    }

    /// g⁻¹(η), clamped into `[INV_LINK_EPS, 1 − INV_LINK_EPS]`.
    #[inline]
    pub fn g_inv(self, eta: f64) -> f64 {
        let raw = match self {
            Link::Logit => {
                if eta >= 0.0 {
                    1.0 / (1.0 + (-eta).exp())
                } else {
                    let e = eta.exp();
                    e / (1.0 + e)
                }
            }
            Link::Cloglog => -(-eta.exp()).exp_m1(),
            Link::Loglog => (-(-eta).exp()).exp(),
        };
        raw.clamp(INV_LINK_EPS, 1.0 - INV_LINK_EPS)
    }

    /// g′(x) for x in (0,1); strictly positive.
    pub fn g_prime(self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::Domain(format!("link argument {x} not in (0,1)")));
        }
        Ok(self.g_prime_raw(x))
    }

    #[inline]
    pub(crate) fn g_prime_raw(self, x: f64) -> f64 {
        match self {
            Link::Logit => 1.0 / (x * (1.0 - x)),
            Link::Cloglog => -1.0 / ((1.0 - x) * (-x).ln_1p()),
            Link::Loglog => 1.0 / (x * neg_ln(x)),
        }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Link::Logit => "logit",
            Link::Cloglog => "cloglog",
            Link::Loglog => "loglog",
        };
        f.write_str(name)
    }
}

impl FromStr for Link {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "logit" => Ok(Link::Logit),
            "cloglog" => Ok(Link::Cloglog),
            "loglog" => Ok(Link::Loglog),
            other => Err(Error::InvalidArgument(format!(
                "unknown link '{other}' (expected logit, cloglog or loglog)"
            ))),
        }
    }
}

/// All links, in a fixed order (useful for grids over links in tests and
/// experiments).
pub const ALL_LINKS: [Link; 3] = [Link::Logit, Link::Cloglog, Link::Loglog];
