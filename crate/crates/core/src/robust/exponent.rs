//! Choosing the annulus count: `beta = min_k max{rho(c^(1/k)), 1/k}`.

use serde::{Deserialize, Serialize};

use crate::params::RhoFn;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub c: f64,
    pub rho_fn: RhoFn,
    /// Minimizing integer annulus count (smallest on ties).
    pub k_star: u64,
    pub beta: f64,
    /// Real `k` where `rho(c^(1/k)) = 1/k`.
    pub k_crossover: f64,
}

/// The objective `max{rho(c^(1/k)), 1/k}` at integer `k`.
pub fn exponent_objective(c: f64, k: u64, rho: RhoFn) -> f64 {
    let kf = k as f64;
    rho.eval(c.powf(1.0 / kf)).max(1.0 / kf)
}

/// Upper end of the brute-force range.
pub fn k_search_limit(c: f64) -> u64 {
    let lc = c.ln();
    let llc = c.max(3.0).ln().ln();
    10 * (lc / llc).ceil().max(0.0) as u64 + 10
}

fn crossover(c: f64, rho: RhoFn) -> f64 {
    // g(k) = rho(c^(1/k)) - 1/k is negative at k = 1 and increasing
    let g = |k: f64| rho.eval(c.powf(1.0 / k)) - 1.0 / k;
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    if g(lo) >= 0.0 {
        return lo;
    }
    while g(hi) < 0.0 && hi < 1e12 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

const TIE_RTOL: f64 = 1e-12;

pub fn exponent_optimize(c: f64, rho: RhoFn) -> ExponentReport {
    assert!(c > 1.0, "approximation factor must exceed 1");
    let mut best = (1u64, exponent_objective(c, 1, rho));
    for k in 2..=k_search_limit(c) {
        let v = exponent_objective(c, k, rho);
        // exact ties (up to rounding) keep the smaller k
        if v < best.1 * (1.0 - TIE_RTOL) {
            best = (k, v);
        }
    }
    ExponentReport {
        c,
        rho_fn: rho,
        k_star: best.0,
        beta: best.1,
        k_crossover: crossover(c, rho),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c10_hamming_is_one_third() {
        let r = exponent_optimize(10.0, RhoFn::HammingOpt);
        assert_eq!(r.k_star, 3);
        assert_eq!(r.beta, 1.0 / 3.0);
    }

    #[test]
    fn c4_values() {
        let h = exponent_optimize(4.0, RhoFn::HammingOpt);
        assert_eq!(h.k_star, 3);
        assert!((h.beta - 1.0 / (2.0 * 4f64.powf(1.0 / 3.0) - 1.0)).abs() < 1e-15);
        // k = 3 and k = 4 tie at 1/3 in exact arithmetic
        let l2 = exponent_optimize(4.0, RhoFn::L2Opt);
        assert_eq!(l2.k_star, 3);
        assert_eq!(l2.beta, 1.0 / 3.0);
    }

    #[test]
    fn beta_decreases_with_c() {
        let b10 = exponent_optimize(10.0, RhoFn::HammingOpt).beta;
        let b100 = exponent_optimize(100.0, RhoFn::HammingOpt).beta;
        assert!(b100 < b10);
    }

    #[test]
    fn crossover_is_a_root() {
        for &c in &[1.5, 4.0, 10.0, 100.0] {
            for rho in RhoFn::ALL {
                let r = exponent_optimize(c, rho);
                let k = r.k_crossover;
                assert!((rho.eval(c.powf(1.0 / k)) - 1.0 / k).abs() < 1e-9);
                assert!((r.k_star as f64 - k).abs() <= 1.0 + 1e-9);
            }
        }
    }
}
