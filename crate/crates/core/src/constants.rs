//! Every tunable constant. Defaults are the values the worst-case guarantees need.
//!
//! Desk-scale experiments override some of these; the resolved table is
//! recorded in every experiment output.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Constants {
    /// Multiplier on `n^rho * ln(nQ)` tables for the fair index.
    pub fair_l_const: f64,
    /// Rejections allowed, in units of `L * ln(nQ)`, before the exhaustive fallback.
    pub fair_fallback_c: f64,
    /// Privacy parameter of the robust decider.
    pub decider_eps: f64,
    /// Leading coefficient of the decider copy count.
    pub decider_l_coeff: f64,
    /// Leading coefficient of the subsample size.
    pub decider_ksub_coeff: f64,
    /// Explicit copy count, replacing the formula.
    pub decider_l: Option<u64>,
    /// Explicit subsample size, replacing the formula.
    pub decider_ksub: Option<u64>,
    /// Extra table multiplier for each decider copy, so a copy answers
    /// correctly with probability well above 1/2.
    pub oblivious_boost: f64,
    /// Target finishing probability of a good annulus.
    pub annuli_p_star: f64,
    /// Allowed estimation error of the finishing probabilities.
    pub annuli_eta: f64,
    /// Leading coefficient of the per-annulus grid length.
    pub annuli_l_coeff: f64,
    /// Explicit grid pool size per annulus, replacing `m * L`.
    pub annuli_pool: Option<u64>,
    /// Explicit number of sampled grid instances per annulus.
    pub annuli_s: Option<u64>,
    /// Coefficient of the truncation budget.
    pub annuli_trunc_coeff: f64,
    /// Coefficient of the relaxed per-annulus budget.
    pub relaxed_budget_coeff: f64,
    /// Probe-count multiplier for the sampled for-all query.
    pub forall_csamp: f64,
    /// Covering radius as a fraction of `cr`.
    pub covering_delta_frac: f64,
    /// Largest covering that may be built.
    pub covering_cell_cap: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            fair_l_const: 1.0,
            fair_fallback_c: 100.0,
            decider_eps: 0.01,
            decider_l_coeff: 24.0,
            decider_ksub_coeff: 40.0,
            decider_l: None,
            decider_ksub: None,
            oblivious_boost: 3.0,
            annuli_p_star: 0.999,
            annuli_eta: 0.001,
            annuli_l_coeff: 2400.0,
            annuli_pool: None,
            annuli_s: None,
            annuli_trunc_coeff: 4.0,
            relaxed_budget_coeff: 100.0,
            forall_csamp: 1.0,
            covering_delta_frac: 0.1,
            covering_cell_cap: 1e6,
        }
    }
}

impl Constants {
    /// Flagging threshold `p* - eta` for the annuli estimator.
    pub fn annuli_tau(&self) -> f64 {
        self.annuli_p_star - self.annuli_eta
    }
}
