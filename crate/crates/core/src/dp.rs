//! Laplace noise and the privacy-parameter calculators used to size the
//! robust constructions.

use serde::{Deserialize, Serialize};

use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::rng::StreamRng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    pub epsilon: f64,
    pub delta: f64,
    pub sensitivity: f64,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, delta: f64, sensitivity: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !(0.0..=1.0).contains(&delta) || !(sensitivity > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "privacy parameters out of range: eps={epsilon}, delta={delta}, sensitivity={sensitivity}"
            )));
        }
        Ok(Self {
            epsilon,
            delta,
            sensitivity,
        })
    }

    /// Laplace scale `sensitivity / epsilon`.
    pub fn scale(&self) -> f64 {
        self.sensitivity / self.epsilon
    }
}

/// One draw from `Lap(lambda)` by inverse CDF.
pub fn laplace_sample(lambda: f64, rng: &mut StreamRng) -> f64 {
    debug_assert!(lambda > 0.0);
    let u = rng.open01() - 0.5;
    if u == 0.0 {
        return 0.0;
    }
    -lambda * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// CDF of `Lap(lambda)`.
pub fn laplace_cdf(lambda: f64, x: f64) -> f64 {
    if x < 0.0 {
        0.5 * (x / lambda).exp()
    } else {
        1.0 - 0.5 * (-x / lambda).exp()
    }
}

/// Privacy of `k` adaptive `(eps, delta)` mechanisms composed together.
pub fn advanced_composition(eps: f64, delta: f64, k: u64, delta_prime: f64) -> Result<(f64, f64)> {
    if eps < 0.0 || delta < 0.0 || !(delta_prime > 0.0 && delta_prime < 1.0) {
        return Err(Error::InvalidParameter(
            "composition needs eps, delta >= 0 and delta' in (0, 1)".into(),
        ));
    }
    let k = k as f64;
    let total = eps * (2.0 * k * (1.0 / delta_prime).ln()).sqrt() + 2.0 * k * eps * eps;
    Ok((total, k * delta + delta_prime))
}

/// Privacy after running an `(eps, delta)` mechanism on `m` of `n` rows
/// sampled with replacement.
pub fn subsampling_amplification(eps: f64, delta: f64, m: u64, n: u64) -> Result<(f64, f64)> {
    if n < 2 * m {
        return Err(Error::InvalidParameter(format!(
            "subsampling needs n >= 2m (got n={n}, m={m})"
        )));
    }
    let ratio = m as f64 / n as f64;
    let e = 6.0 * eps * ratio;
    Ok((e, e.exp() * 4.0 * ratio * delta))
}

/// Copy count and subsample size of the robust decider.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeciderConstants {
    pub copies: u64,
    pub k_sub: u64,
}

/// `L = ceil(coeff/eps * ln(1/delta)^1.5 * sqrt(2Q))`, `k = max(ceil(40 ln(Q/delta)), 1)`.
pub fn decider_constants_formula(
    queries: u64,
    delta: f64,
    eps: f64,
    l_coeff: f64,
    ksub_coeff: f64,
) -> DeciderConstants {
    let q = queries as f64;
    let l = (l_coeff / eps * (1.0 / delta).ln().powf(1.5) * (2.0 * q).sqrt()).ceil();
    let k = (ksub_coeff * (q / delta).ln()).ceil().max(1.0);
    DeciderConstants {
        copies: l as u64,
        k_sub: k as u64,
    }
}

/// Decider constants for `params`, honouring any explicit overrides.
pub fn decider_constants(params: &ProblemParams, consts: &Constants) -> DeciderConstants {
    let f = decider_constants_formula(
        params.queries,
        params.delta,
        consts.decider_eps,
        consts.decider_l_coeff,
        consts.decider_ksub_coeff,
    );
    DeciderConstants {
        copies: consts.decider_l.unwrap_or(f.copies).max(1),
        k_sub: consts.decider_ksub.unwrap_or(f.k_sub).max(1),
    }
}

/// The per-round privacy target `eps' = eps / (2 sqrt(2Q ln(1/delta)))`.
pub fn per_round_epsilon(eps: f64, queries: u64, delta: f64) -> f64 {
    eps / (2.0 * (2.0 * queries as f64 * (1.0 / delta).ln()).sqrt())
}

/// Both sides of the subsampling requirement `6k/L < eps'` with the
/// unrounded decider constants: returns `(6k/L, eps')`.
pub fn subsampling_requirement(eps: f64, queries: u64, delta: f64) -> (f64, f64) {
    let q = queries as f64;
    let l = 24.0 / eps * (1.0 / delta).ln().powf(1.5) * (2.0 * q).sqrt();
    let k = (q / delta).ln();
    (6.0 * k / l, per_round_epsilon(eps, queries, delta))
}
