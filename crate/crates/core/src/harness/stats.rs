//! Goodness-of-fit and interval estimates used by the test drivers.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
}

fn p_value(stat: f64, dof: u64) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    ChiSquared::new(dof as f64)
        .expect("positive degrees of freedom")
        .sf(stat)
}

/// Pearson's test of `observed` against equal cell probabilities.
pub fn chi_square_uniform(observed: &[u64]) -> ChiSquareReport {
    let n: u64 = observed.iter().sum();
    let expected = n as f64 / observed.len() as f64;
    let stat = observed
        .iter()
        .map(|&o| {
            let d = o as f64 - expected;
            d * d / expected
        })
        .sum();
    let dof = observed.len().saturating_sub(1) as u64;
    ChiSquareReport {
        statistic: stat,
        dof,
        p_value: p_value(stat, dof),
    }
}

/// Pearson's test that two count vectors over the same cells come from one
/// distribution. Cells empty in both samples are dropped.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> ChiSquareReport {
    assert_eq!(a.len(), b.len());
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    let total = (na + nb) as f64;
    let mut stat = 0.0;
    let mut cells = 0u64;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        cells += 1;
        for (obs, row) in [(x, na), (y, nb)] {
            let e = row as f64 * col / total;
            stat += (obs as f64 - e).powi(2) / e;
        }
    }
    let dof = cells.saturating_sub(1);
    ChiSquareReport {
        statistic: stat,
        dof,
        p_value: p_value(stat, dof),
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.96;

/// Kolmogorov–Smirnov distance between the empirical CDF of `xs` and `cdf`.
pub fn ks_statistic(xs: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_counts_pass() {
        let r = chi_square_uniform(&[100, 100, 100]);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn biased_counts_rejected() {
        // one point twice as likely, 10^4 draws over 3 cells
        let r = chi_square_uniform(&[5000, 2500, 2500]);
        assert!(r.p_value < 1e-3);
    }

    #[test]
    fn known_p_value() {
        // chi2 with 2 dof: sf(x) = exp(-x/2)
        let r = chi_square_uniform(&[60, 20, 20]);
        assert!((r.p_value - (-r.statistic / 2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn homogeneity_identical_rows() {
        let r = chi_square_homogeneity(&[10, 20, 0, 30], &[20, 40, 0, 60]);
        assert!(r.statistic.abs() < 1e-12);
        assert_eq!(r.dof, 2);
    }

    #[test]
    fn wilson_contains_estimate() {
        let (lo, hi) = wilson_interval(5, 100, Z95);
        assert!(lo < 0.05 && 0.05 < hi);
        assert!((lo - 0.0215).abs() < 1e-3);
        assert!((hi - 0.1118).abs() < 1e-3);
        assert_eq!(wilson_interval(0, 10, Z95).0, 0.0);
    }

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let mut xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let d = ks_statistic(&mut xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.0005).abs() < 1e-12);
    }
}
