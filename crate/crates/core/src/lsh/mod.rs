//! Bit-sampling LSH with OR-of-ANDs amplification.

mod blob;
mod index;
mod tables;

pub use index::AmplifiedLshIndex;
pub use tables::{Candidate, LshTables};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::params::{ProblemParams, RhoMode};

/// Shape of one amplified index.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LshParams {
    /// Bits concatenated per table (AND width).
    pub k_concat: usize,
    /// Number of tables (OR width).
    pub l_tables: usize,
    pub p1: f64,
    pub p2: f64,
    pub rho: f64,
    pub seed: u64,
}

/// Collision probabilities of a single sampled coordinate at distances `r` and `cr`.
pub fn bit_sampling_probs(dim: usize, r: f64, cr: f64) -> Result<(f64, f64)> {
    let d = dim as f64;
    if cr > d {
        return Err(Error::InvalidParameter(format!(
            "cr = {cr} exceeds the dimension {dim}; far collision probability would be negative"
        )));
    }
    Ok((1.0 - r / d, 1.0 - cr / d))
}

/// `ln(1/p1) / ln(1/p2)`, zero when far points can never collide.
pub fn measured_rho(p1: f64, p2: f64) -> f64 {
    if p2 <= 0.0 {
        0.0
    } else {
        (1.0 / p1).ln() / (1.0 / p2).ln()
    }
}

/// Sizes an amplified bit-sampling index for `n` points.
///
/// `k = ceil(log_{1/p2} n)` and `L = ceil(n^rho * max(1, boost))`, both at least 1.
/// `boost` carries any extra multiplicative factor the caller needs.
pub fn derive_params(
    params: &ProblemParams,
    dim: usize,
    n: usize,
    boost: f64,
    rho_mode: RhoMode,
    seed: u64,
) -> Result<LshParams> {
    if params.metric != Metric::Hamming {
        return Err(Error::ModeMismatch("bit-sampling LSH requires a hamming metric".into()));
    }
    let (p1, p2) = bit_sampling_probs(dim, params.r, params.cr())?;
    let nf = n.max(1) as f64;
    let k = if p2 <= 0.0 {
        1
    } else {
        ((nf.ln() / (1.0 / p2).ln()).ceil() as usize).max(1)
    };
    let rho = match rho_mode {
        RhoMode::Measured => measured_rho(p1, p2),
        RhoMode::Formula(f) => f.eval(params.c),
    };
    let l = ((nf.powf(rho) * boost.max(1.0)).ceil() as usize).max(1);
    Ok(LshParams {
        k_concat: k,
        l_tables: l,
        p1,
        p2,
        rho,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::RhoFn;

    #[test]
    fn probabilities_for_d10_r2_c2() {
        let p = ProblemParams::hamming(2.0, 2.0, 1, 0.001).unwrap();
        let lp = derive_params(&p, 10, 100, 1.0, RhoMode::Measured, 0).unwrap();
        assert!((lp.p1 - 0.8).abs() < 1e-15);
        assert!((lp.p2 - 0.6).abs() < 1e-15);
        assert!(lp.rho > 0.0 && lp.rho < 1.0);
    }

    #[test]
    fn optimal_exponent_mode() {
        let p = ProblemParams::hamming(2.0, 2.0, 1, 0.001).unwrap();
        let lp = derive_params(&p, 10, 100, 1.0, RhoMode::Formula(RhoFn::HammingOpt), 0).unwrap();
        assert_eq!(lp.rho, 1.0 / 3.0);
    }

    #[test]
    fn single_point_clamps_to_one() {
        let p = ProblemParams::hamming(2.0, 2.0, 1, 0.001).unwrap();
        let lp = derive_params(&p, 10, 1, 1.0, RhoMode::Measured, 0).unwrap();
        assert_eq!(lp.k_concat, 1);
        assert_eq!(lp.l_tables, 1);
    }

    #[test]
    fn formula_values() {
        // k = ceil(ln 1000 / ln(1/0.6)) = ceil(13.52) = 14
        let p = ProblemParams::hamming(2.0, 2.0, 1, 0.001).unwrap();
        let lp = derive_params(&p, 10, 1000, 3.0, RhoMode::Measured, 0).unwrap();
        assert_eq!(lp.k_concat, 14);
        let rho = (1.0f64 / 0.8).ln() / (1.0f64 / 0.6).ln();
        assert_eq!(lp.l_tables, (1000f64.powf(rho) * 3.0).ceil() as usize);
    }

    #[test]
    fn rejects_cr_beyond_dimension() {
        let p = ProblemParams::hamming(3.0, 4.0, 1, 0.001).unwrap();
        assert!(derive_params(&p, 10, 100, 1.0, RhoMode::Measured, 0).is_err());
        let lp = ProblemParams::new(Metric::Lp(2.0), 2.0, 1.0, 1, 0.001).unwrap();
        assert!(derive_params(&lp, 10, 100, 1.0, RhoMode::Measured, 0).is_err());
    }

    #[test]
    fn cr_equal_to_dimension() {
        let p = ProblemParams::hamming(2.0, 5.0, 1, 0.001).unwrap();
        let lp = derive_params(&p, 10, 100, 1.0, RhoMode::Measured, 0).unwrap();
        assert_eq!(lp.p2, 0.0);
        assert_eq!(lp.k_concat, 1);
        assert_eq!(lp.rho, 0.0);
    }
}
