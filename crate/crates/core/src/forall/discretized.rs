//! Robust ℓp ANN by discretization: snap the query to a Δ-cover point, then
//! ask an inner `(c', r + Δ)` structure built to succeed on every cover point.

use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::lsh::{derive_params, AmplifiedLshIndex};
use crate::metric::{lp_distance, BitVector, Dataset, Metric, Point, PointId};
use crate::params::{ProblemParams, RhoMode};

use super::covering::{real, AnchorGrid, GridCovering, Snap};

/// Widest unary embedding built, in bits.
pub const MAX_UNARY_BITS: usize = 1 << 16;

/// Inner approximation factor `(cr - Δ) / (r + Δ)`.
pub fn discretized_c_prime(c: f64, r: f64, delta: f64) -> f64 {
    (c * r - delta) / (r + delta)
}

/// `ρ(c')` for `Δ = cr/10` and `ρ(x) = 1/(2x² - 1)`: `(10+c)² / (161c² - 20c - 100)`.
pub fn rho_prime(c: f64) -> f64 {
    (10.0 + c).powi(2) / (161.0 * c * c - 20.0 * c - 100.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoveringMode {
    /// Cell grid on `[-C, C]^d`.
    Grid { c_bound: f64 },
    /// Local grids around data points.
    DataDependent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerKind {
    /// Brute force honouring the `(c', r + Δ)` contract; any `p`.
    Exhaustive,
    /// Bit-sampling LSH over a unary embedding; `p = 1` only.
    Unary,
}

#[derive(Clone, Debug)]
enum Cover {
    Grid(GridCovering),
    Anchors(AnchorGrid),
}

#[derive(Clone, Debug)]
struct UnaryInner {
    lo: f64,
    unit: f64,
    levels: usize,
    index: AmplifiedLshIndex,
    /// embedded id -> dataset id
    ids: Vec<PointId>,
    near_h: f64,
    far_h: f64,
}

impl UnaryInner {
    fn embed(&self, x: &[f64]) -> Point {
        let mut b = BitVector::zeros(x.len() * self.levels);
        for (i, &v) in x.iter().enumerate() {
            let lvl = ((v - self.lo) / self.unit).round().clamp(0.0, self.levels as f64) as usize;
            for j in 0..lvl {
                b.set(i * self.levels + j, true);
            }
        }
        Point::Bits(b)
    }

    fn candidates(&self, x: &[f64]) -> Vec<PointId> {
        let e = self.embed(x);
        self.index
            .candidates(&e)
            .expect("embedded query")
            .into_iter()
            .map(|c| self.ids[c.id.0 as usize])
            .collect()
    }
}

#[derive(Clone, Debug)]
enum Inner {
    Exhaustive,
    Unary(Box<UnaryInner>),
}

#[derive(Clone, Debug)]
pub struct DiscretizedIndex {
    params: ProblemParams,
    p: f64,
    delta: f64,
    c_prime: f64,
    cover: Cover,
    ds: Dataset,
    inner: Inner,
}

impl DiscretizedIndex {
    pub fn build(
        ds: Dataset,
        params: ProblemParams,
        mode: CoveringMode,
        inner: InnerKind,
        seed: u64,
        consts: &Constants,
    ) -> Result<Self> {
        let Metric::Lp(p) = ds.metric() else {
            return Err(Error::ModeMismatch("discretized index needs an lp dataset".into()));
        };
        let (c, r) = (params.c, params.r);
        let delta = consts.covering_delta_frac * params.cr();
        let c_prime = discretized_c_prime(c, r, delta);
        if !(delta < params.cr() && c_prime > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Δ = {delta} leaves c' = {c_prime} <= 1; need Δ < r(c-1)/2"
            )));
        }
        let dim = ds.dim();
        let (cover, log_cover, slack) = match mode {
            CoveringMode::Grid { c_bound } => {
                let g = GridCovering::new(c_bound, delta, p, dim, consts.covering_cell_cap)?;
                let lc = g.log_count();
                (Cover::Grid(g), lc, 0.5)
            }
            CoveringMode::DataDependent => {
                let a = AnchorGrid {
                    delta,
                    p,
                    dim,
                    radius: r,
                };
                let lc = a.log_count(ds.len());
                if lc > consts.covering_cell_cap.ln() {
                    return Err(Error::CoveringTooLarge(format!(
                        "anchor grids have e^{lc:.3} points, above the cap of {}",
                        consts.covering_cell_cap
                    )));
                }
                (Cover::Anchors(a), lc, 1.0)
            }
        };
        let inner = match inner {
            InnerKind::Exhaustive => Inner::Exhaustive,
            InnerKind::Unary => {
                if p != 1.0 {
                    return Err(Error::ModeMismatch("unary embedding needs p = 1".into()));
                }
                Inner::Unary(Box::new(Self::build_unary(
                    &ds, &params, delta, &cover, log_cover, slack, seed,
                )?))
            }
        };
        Ok(Self {
            params,
            p,
            delta,
            c_prime,
            cover,
            ds,
            inner,
        })
    }

    fn build_unary(
        ds: &Dataset,
        params: &ProblemParams,
        delta: f64,
        cover: &Cover,
        log_cover: f64,
        slack: f64,
        seed: u64,
    ) -> Result<UnaryInner> {
        let dim = ds.dim();
        let max_abs = ds
            .iter()
            .flat_map(|(_, p)| real(p).iter().map(|x| x.abs()))
            .fold(0.0f64, f64::max);
        let (lo, unit, hi) = match cover {
            Cover::Grid(g) => {
                // cell centers are odd multiples of `unit` above -C
                let unit = g.width() / 2.0;
                let ext = ((max_abs - g.c_bound).max(0.0) / (2.0 * unit)).ceil() * 2.0 * unit;
                (-g.c_bound - ext, unit, g.c_bound + ext)
            }
            Cover::Anchors(a) => {
                let unit = a.step() / 2.0;
                let reach = max_abs + params.r + delta;
                (-reach, unit, reach)
            }
        };
        let levels = ((hi - lo) / unit).round().max(1.0) as usize;
        if levels * dim > MAX_UNARY_BITS {
            return Err(Error::CoveringTooLarge(format!(
                "unary embedding needs {} bits, above {MAX_UNARY_BITS}",
                levels * dim
            )));
        }
        let d = dim as f64;
        let near_h = (params.r + delta) / unit + slack * d;
        let far_h = (params.cr() - delta) / unit - slack * d;
        if !(far_h > near_h) {
            return Err(Error::InvalidParameter(format!(
                "unary resolution too coarse: far radius {far_h} <= near radius {near_h}"
            )));
        }
        let mut inner = UnaryInner {
            lo,
            unit,
            levels,
            index: AmplifiedLshIndex::build(
                Dataset::new(Metric::Hamming, 1)?,
                crate::lsh::LshParams {
                    k_concat: 1,
                    l_tables: 1,
                    p1: 1.0,
                    p2: 0.0,
                    rho: 0.0,
                    seed,
                },
            )?,
            ids: Vec::new(),
            near_h,
            far_h,
        };
        let mut emb = Dataset::new(Metric::Hamming, levels * dim)?;
        for (id, p) in ds.iter() {
            emb.push(inner.embed(real(p)))?;
            inner.ids.push(id);
        }
        let hp = ProblemParams::hamming(far_h / near_h, near_h, params.queries, params.delta)?;
        let n = emb.len();
        let boost = log_cover + (n.max(1) as f64).ln();
        let lp = derive_params(&hp, levels * dim, n, boost, RhoMode::Measured, seed)?;
        inner.index = AmplifiedLshIndex::build(emb, lp)?;
        Ok(inner)
    }

    pub fn c_prime(&self) -> f64 {
        self.c_prime
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn dataset(&self) -> &Dataset {
        &self.ds
    }

    /// Tables of the inner LSH, if any.
    pub fn inner_tables(&self) -> Option<usize> {
        match &self.inner {
            Inner::Unary(u) => Some(u.index.num_tables()),
            Inner::Exhaustive => None,
        }
    }

    /// Near and far Hamming radii of the unary embedding, if any.
    pub fn unary_radii(&self) -> Option<(f64, f64)> {
        match &self.inner {
            Inner::Unary(u) => Some((u.near_h, u.far_h)),
            Inner::Exhaustive => None,
        }
    }

    fn candidates(&self, x: &[f64]) -> Vec<PointId> {
        match &self.inner {
            Inner::Exhaustive => self.ds.ids(),
            Inner::Unary(u) => u.candidates(x),
        }
    }

    fn first_within(&self, x: &[f64], radius: f64) -> Option<PointId> {
        self.candidates(x)
            .into_iter()
            .find(|&id| lp_distance(self.p, real(self.ds.get(id).expect("live")), x) <= radius)
    }

    /// The cover point for `q`, or `None` when uncovered (data-dependent only).
    pub fn snap(&self, q: &[f64]) -> Result<Option<Vec<f64>>> {
        match &self.cover {
            Cover::Grid(g) => g.snap(q).map(Some),
            Cover::Anchors(a) => {
                let cands: Vec<PointId> = self.candidates(q);
                let it = cands
                    .iter()
                    .map(|&id| (id.0 as usize, real(self.ds.get(id).expect("live"))));
                Ok(match a.snap(it, q) {
                    Snap::Covered { point, .. } => Some(point),
                    Snap::NotCovered => None,
                })
            }
        }
    }

    pub fn query(&self, q: &Point) -> Result<Option<PointId>> {
        self.ds.check(q)?;
        let qx = real(q);
        let cr = self.params.cr();
        let Some(s) = self.snap(qx)? else {
            // no anchor nearby: plain ANN on the raw query
            return Ok(self.first_within(qx, cr));
        };
        debug_assert!(lp_distance(self.p, &s, qx) <= self.delta * (1.0 + 1e-12));
        let ans = self.first_within(&s, cr - self.delta);
        if let Some(id) = ans {
            let x = real(self.ds.get(id).expect("live"));
            assert!(lp_distance(self.p, x, &s) <= cr - self.delta);
            assert!(lp_distance(self.p, x, qx) <= cr);
        }
        Ok(ans)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::oracle_ann_verdicts;
    use crate::rng::{StreamId, StreamRng};

    #[test]
    fn rho_prime_at_four() {
        assert_eq!(rho_prime(4.0), 196.0 / 2396.0);
        let cp = 9.0 * 4.0 / 14.0;
        assert!((rho_prime(4.0) - 1.0 / (2.0 * cp * cp - 1.0)).abs() < 1e-15);
        assert!((discretized_c_prime(4.0, 1.0, 0.4) - cp).abs() < 1e-15);
    }

    fn box_ds(n: usize, d: usize, p: f64, seed: u64) -> Dataset {
        let mut rng = StreamRng::new(seed, StreamId::derive("box", &[]));
        let pts = (0..n)
            .map(|_| Point::real((0..d).map(|_| 4.0 * rng.next_f64() - 2.0).collect()))
            .collect();
        Dataset::from_points(Metric::Lp(p), d, pts).unwrap()
    }

    fn planted(ds: &mut Dataset, r: f64, rng: &mut StreamRng) -> Point {
        let d = ds.dim();
        let q: Vec<f64> = (0..d).map(|_| 3.0 * rng.next_f64() - 1.5).collect();
        // move by r along one axis
        let mut x = q.clone();
        let axis = rng.index(d);
        x[axis] += if x[axis] > 0.0 { -r } else { r };
        ds.push(Point::real(x)).unwrap();
        Point::real(q)
    }

    #[test]
    fn planted_queries_answered() {
        let params = ProblemParams::new(Metric::Lp(1.0), 4.0, 0.5, 100, 1e-3).unwrap();
        let mut rng = StreamRng::new(1, StreamId::derive("plant", &[]));
        let mut ok = 0;
        for t in 0..100u64 {
            let mut ds = box_ds(30, 2, 1.0, t);
            let q = planted(&mut ds, 0.5, &mut rng);
            for (mode, inner) in [
                (CoveringMode::Grid { c_bound: 2.0 }, InnerKind::Unary),
                (CoveringMode::DataDependent, InnerKind::Unary),
                (CoveringMode::Grid { c_bound: 2.0 }, InnerKind::Exhaustive),
            ] {
                let di = DiscretizedIndex::build(ds.clone(), params, mode, inner, t, &Constants::default()).unwrap();
                let ans = di.query(&q).unwrap();
                let v = oracle_ann_verdicts(&ds, &q, &params).unwrap();
                if v.accepts_point(ans) {
                    ok += 1;
                }
            }
        }
        assert!(ok >= 297, "{ok}/300");
    }

    #[test]
    fn empty_cr_ball_gives_bottom() {
        let params = ProblemParams::new(Metric::Lp(2.0), 4.0, 0.1, 10, 1e-3).unwrap();
        let ds = Dataset::from_points(Metric::Lp(2.0), 2, vec![Point::real(vec![1.5, 1.5])]).unwrap();
        let di = DiscretizedIndex::build(
            ds,
            params,
            CoveringMode::Grid { c_bound: 2.0 },
            InnerKind::Exhaustive,
            0,
            &Constants::default(),
        )
        .unwrap();
        assert_eq!(di.query(&Point::real(vec![-1.0, -1.0])).unwrap(), None);
        assert!(matches!(
            di.query(&Point::real(vec![3.0, 0.0])),
            Err(Error::OutOfUniverse(_))
        ));
    }

    #[test]
    fn rejects_large_delta() {
        let params = ProblemParams::new(Metric::Lp(2.0), 1.1, 1.0, 10, 1e-3).unwrap();
        let ds = box_ds(5, 2, 2.0, 0);
        let consts = Constants {
            covering_delta_frac: 0.1,
            ..Constants::default()
        };
        assert!(DiscretizedIndex::build(
            ds,
            params,
            CoveringMode::Grid { c_bound: 2.0 },
            InnerKind::Exhaustive,
            0,
            &consts
        )
        .is_err());
    }
}
