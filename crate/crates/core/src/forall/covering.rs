//! Δ-coverings of an ℓp box, realized arithmetically: a cover point is never
//! materialized except as the result of snapping a query.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{lp_distance, Point};

/// `ln (2 C d^{1/p} / Δ)^d`.
pub fn grid_count_log_bound(c_bound: f64, dim: usize, p: f64, delta: f64) -> f64 {
    let d = dim as f64;
    d * (2.0 * c_bound * d.powf(1.0 / p) / delta).ln()
}

/// A cell-centered grid on `[-C, C]^d`.
///
/// Each axis is cut into `J = ceil(C / ε)` cells of width `2C / J <= 2ε`,
/// where `ε = Δ / d^{1/p}`; the cover point of a query is the center of its
/// cell, so every coordinate moves by at most `ε` and the ℓp move is at most Δ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCovering {
    pub c_bound: f64,
    pub delta: f64,
    pub p: f64,
    pub dim: usize,
    pub cells_per_axis: u64,
}

impl GridCovering {
    pub fn new(c_bound: f64, delta: f64, p: f64, dim: usize, cell_cap: f64) -> Result<Self> {
        if !(c_bound > 0.0 && delta > 0.0 && p >= 1.0 && dim > 0) {
            return Err(Error::InvalidParameter(
                "covering needs C > 0, Δ > 0, p >= 1, d > 0".into(),
            ));
        }
        let eps = delta / (dim as f64).powf(1.0 / p);
        let j = (c_bound / eps).ceil().max(1.0);
        let cov = Self {
            c_bound,
            delta,
            p,
            dim,
            cells_per_axis: j as u64,
        };
        if cov.log_count() > cell_cap.ln() {
            return Err(Error::CoveringTooLarge(format!(
                "grid has e^{:.3} cells, above the cap of {cell_cap}",
                cov.log_count()
            )));
        }
        Ok(cov)
    }

    /// Per-coordinate error bound `ε`.
    pub fn eps(&self) -> f64 {
        self.delta / (self.dim as f64).powf(1.0 / self.p)
    }

    pub fn width(&self) -> f64 {
        2.0 * self.c_bound / self.cells_per_axis as f64
    }

    /// `ln |Ŝ| = d ln J`.
    pub fn log_count(&self) -> f64 {
        self.dim as f64 * (self.cells_per_axis as f64).ln()
    }

    /// Center of the cell containing `x` on one axis.
    #[inline]
    pub fn snap_coord(&self, x: f64) -> f64 {
        let w = self.width();
        let j = ((x + self.c_bound) / w)
            .floor()
            .clamp(0.0, (self.cells_per_axis - 1) as f64);
        -self.c_bound + w * (j + 0.5)
    }

    pub fn snap(&self, q: &[f64]) -> Result<Vec<f64>> {
        if q.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: q.len(),
            });
        }
        if let Some(x) = q.iter().find(|x| !(x.abs() <= self.c_bound)) {
            return Err(Error::OutOfUniverse(format!(
                "coordinate {x} outside [-{0}, {0}]",
                self.c_bound
            )));
        }
        Ok(q.iter().map(|&x| self.snap_coord(x)).collect())
    }
}

/// Result of snapping in data-dependent mode.
#[derive(Clone, Debug, PartialEq)]
pub enum Snap {
    Covered { anchor: usize, point: Vec<f64> },
    NotCovered,
}

/// Local grids of step `2ε` around each anchor, covering the anchor's r-ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnchorGrid {
    pub delta: f64,
    pub p: f64,
    pub dim: usize,
    pub radius: f64,
}

impl AnchorGrid {
    pub fn eps(&self) -> f64 {
        self.delta / (self.dim as f64).powf(1.0 / self.p)
    }

    pub fn step(&self) -> f64 {
        2.0 * self.eps()
    }

    /// `ln` of the cover size: `n * (2r/step + 1)^d` local points.
    pub fn log_count(&self, anchors: usize) -> f64 {
        (anchors.max(1) as f64).ln() + self.dim as f64 * (2.0 * self.radius / self.step() + 1.0).ln()
    }

    /// `a + w * round((q - a) / w)`.
    pub fn snap_to(&self, anchor: &[f64], q: &[f64]) -> Vec<f64> {
        let w = self.step();
        anchor
            .iter()
            .zip(q)
            .map(|(&a, &x)| a + w * ((x - a) / w).round())
            .collect()
    }

    /// Snaps to the grid of the nearest anchor within `radius`, if any.
    /// `candidates` lists `(index, coordinates)` of the anchors to consider.
    pub fn snap<'a>(&self, candidates: impl IntoIterator<Item = (usize, &'a [f64])>, q: &[f64]) -> Snap {
        let mut best: Option<(f64, usize, &[f64])> = None;
        for (i, a) in candidates {
            let d = lp_distance(self.p, a, q);
            if d <= self.radius && best.is_none_or(|(bd, bi, _)| (d, i) < (bd, bi)) {
                best = Some((d, i, a));
            }
        }
        match best {
            Some((_, i, a)) => Snap::Covered {
                anchor: i,
                point: self.snap_to(a, q),
            },
            None => Snap::NotCovered,
        }
    }
}

pub(crate) fn real(p: &Point) -> &[f64] {
    p.as_real().expect("real point")
}
