use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::Metric;

/// Largest failure probability the robust constructions accept.
pub const MAX_DELTA: f64 = 0.0025;

/// The `(c, r)`-ANN instance description shared by every structure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub metric: Metric,
    /// Approximation factor, `c > 1`.
    pub c: f64,
    /// Near radius, `r > 0`.
    pub r: f64,
    /// Maximum number of adaptive queries.
    pub queries: u64,
    /// Failure probability in `(0, 0.0025]`.
    pub delta: f64,
}

impl ProblemParams {
    pub fn new(metric: Metric, c: f64, r: f64, queries: u64, delta: f64) -> Result<Self> {
        if !(c > 1.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("c must exceed 1, got {c}")));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("r must be positive, got {r}")));
        }
        if queries == 0 {
            return Err(Error::InvalidParameter("query budget must be at least 1".into()));
        }
        if !(delta > 0.0 && delta <= MAX_DELTA) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, {MAX_DELTA}], got {delta}"
            )));
        }
        Ok(Self {
            metric: metric.validate()?,
            c,
            r,
            queries,
            delta,
        })
    }

    pub fn hamming(c: f64, r: f64, queries: u64, delta: f64) -> Result<Self> {
        Self::new(Metric::Hamming, c, r, queries, delta)
    }

    #[inline]
    pub fn cr(&self) -> f64 {
        self.c * self.r
    }
}

/// Closed-form LSH exponents used for sizing and for the annulus optimizer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoFn {
    /// `1/(2c-1)`, the optimal data-dependent exponent on the hypercube.
    HammingOpt,
    /// `1/(2c^2-1)`, the optimal exponent in l2.
    L2Opt,
    /// `1/c`, the idealized bit-sampling exponent.
    BitSampling,
}

impl RhoFn {
    pub const ALL: [RhoFn; 3] = [RhoFn::HammingOpt, RhoFn::L2Opt, RhoFn::BitSampling];

    pub fn eval(self, c: f64) -> f64 {
        match self {
            RhoFn::HammingOpt => 1.0 / (2.0 * c - 1.0),
            RhoFn::L2Opt => 1.0 / (2.0 * c * c - 1.0),
            RhoFn::BitSampling => 1.0 / c,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RhoFn::HammingOpt => "hamming_opt",
            RhoFn::L2Opt => "l2_opt",
            RhoFn::BitSampling => "bit_sampling",
        }
    }
}

impl fmt::Display for RhoFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RhoFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RhoFn::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown rho function `{s}`")))
    }
}

/// How an LSH structure picks the exponent that sizes its table count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoMode {
    /// `ln(1/p1)/ln(1/p2)` from the actual bit-sampling collision probabilities.
    Measured,
    Formula(RhoFn),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ProblemParams::hamming(2.0, 1.0, 1, 0.001).is_ok());
        assert!(ProblemParams::hamming(1.0, 1.0, 1, 0.001).is_err());
        assert!(ProblemParams::hamming(2.0, 0.0, 1, 0.001).is_err());
        assert!(ProblemParams::hamming(2.0, 1.0, 0, 0.001).is_err());
        assert!(ProblemParams::hamming(2.0, 1.0, 1, 0.0).is_err());
        assert!(ProblemParams::hamming(2.0, 1.0, 1, 0.0025).is_ok());
        assert!(ProblemParams::hamming(2.0, 1.0, 1, 0.003).is_err());
        assert!(ProblemParams::new(Metric::Lp(0.5), 2.0, 1.0, 1, 0.001).is_err());
    }

    #[test]
    fn rho_formulas() {
        assert_eq!(RhoFn::HammingOpt.eval(2.0), 1.0 / 3.0);
        assert_eq!(RhoFn::L2Opt.eval(2.0), 1.0 / 7.0);
        assert_eq!(RhoFn::BitSampling.eval(4.0), 0.25);
        for r in RhoFn::ALL {
            assert_eq!(r.name().parse::<RhoFn>().unwrap(), r);
        }
    }
}
