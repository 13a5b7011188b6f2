//! Points, distances, datasets and the brute-force ground truth.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ProblemParams;

/// Stable identifier of a dataset point. Ids are never reused.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PointId(pub u32);

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A packed bit vector, the coordinates of a Hamming-mode point.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitVector {
    dim: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            words: vec![0; dim.div_ceil(64)],
        }
    }

    /// Builds from a slice of 0/1 values.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => v.set(i, true),
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "hamming coordinate must be 0 or 1, got {other}"
                    )))
                }
            }
        }
        Ok(v)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        let mask = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn hamming(&self, other: &BitVector) -> u32 {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.dim).map(|i| u8::from(self.get(i))).collect()
    }
}

/// Coordinates of a point in one of the two supported spaces.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Bits(BitVector),
    Real(Vec<f64>),
}

impl Point {
    pub fn bits(bits: &[u8]) -> Result<Self> {
        BitVector::from_bits(bits).map(Point::Bits)
    }

    pub fn real(coords: Vec<f64>) -> Self {
        Point::Real(coords)
    }

    pub fn dim(&self) -> usize {
        match self {
            Point::Bits(b) => b.dim(),
            Point::Real(v) => v.len(),
        }
    }

    pub fn as_bits(&self) -> Option<&BitVector> {
        match self {
            Point::Bits(b) => Some(b),
            Point::Real(_) => None,
        }
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match self {
            Point::Real(v) => Some(v),
            Point::Bits(_) => None,
        }
    }

    /// Space-separated coordinates, as used by the text formats.
    pub fn render(&self) -> String {
        match self {
            Point::Bits(b) => b.to_bits().iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "),
            Point::Real(v) => v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "),
        }
    }
}

/// The metric of a dataset: Hamming over `{0,1}^d` or `l_p` over `R^d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Metric {
    Hamming,
    Lp(f64),
}

impl Metric {
    pub fn validate(self) -> Result<Self> {
        match self {
            Metric::Lp(p) if !(p >= 1.0 && p.is_finite()) => Err(Error::InvalidParameter(format!(
                "l_p exponent must be a finite p >= 1, got {p}"
            ))),
            m => Ok(m),
        }
    }

    fn accepts(self, p: &Point) -> bool {
        matches!(
            (self, p),
            (Metric::Hamming, Point::Bits(_)) | (Metric::Lp(_), Point::Real(_))
        )
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Hamming => write!(f, "hamming"),
            Metric::Lp(p) => write!(f, "lp:{p}"),
        }
    }
}

/// Distance between two points under `metric`.
pub fn distance(metric: Metric, a: &Point, b: &Point) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    match (metric, a, b) {
        (Metric::Hamming, Point::Bits(x), Point::Bits(y)) => Ok(f64::from(x.hamming(y))),
        (Metric::Lp(p), Point::Real(x), Point::Real(y)) => Ok(lp_distance(p, x, y)),
        _ => Err(Error::ModeMismatch(format!("points incompatible with metric {metric}"))),
    }
}

pub(crate) fn lp_distance(p: f64, x: &[f64], y: &[f64]) -> f64 {
    if p == 1.0 {
        x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum()
    } else if p == 2.0 {
        x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    } else {
        x.iter()
            .zip(y)
            .map(|(a, b)| (a - b).abs().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

/// An ordered, mutable collection of points sharing one metric and dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    metric: Metric,
    dim: usize,
    slots: Vec<Option<Point>>,
    live: usize,
}

impl Dataset {
    pub fn new(metric: Metric, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        Ok(Self {
            metric: metric.validate()?,
            dim,
            slots: Vec::new(),
            live: 0,
        })
    }

    pub fn from_points(metric: Metric, dim: usize, points: Vec<Point>) -> Result<Self> {
        let mut ds = Self::new(metric, dim)?;
        for p in points {
            ds.push(p)?;
        }
        Ok(ds)
    }

    /// Rebuilds a dataset from raw slots, dead ids included.
    pub(crate) fn from_slots(metric: Metric, dim: usize, slots: Vec<Option<Point>>) -> Result<Self> {
        let mut ds = Self::new(metric, dim)?;
        for p in slots.iter().flatten() {
            ds.check(p)?;
        }
        ds.live = slots.iter().flatten().count();
        ds.slots = slots;
        Ok(ds)
    }

    /// Number of ids ever assigned, dead or alive.
    pub fn capacity_ids(&self) -> usize {
        self.slots.len()
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of live points.
    pub fn len(&self) -> usize {
        self.live
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    /// The id the next insertion will receive.
    pub fn next_id(&self) -> PointId {
        PointId(self.slots.len() as u32)
    }

    pub fn check(&self, p: &Point) -> Result<()> {
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: p.dim(),
            });
        }
        if !self.metric.accepts(p) {
            return Err(Error::ModeMismatch(format!(
                "point does not belong to a {} dataset",
                self.metric
            )));
        }
        Ok(())
    }

    pub fn push(&mut self, p: Point) -> Result<PointId> {
        self.check(&p)?;
        let id = self.next_id();
        self.slots.push(Some(p));
        self.live += 1;
        Ok(id)
    }

    pub fn remove(&mut self, id: PointId) -> Result<Point> {
        let slot = self.slots.get_mut(id.0 as usize).ok_or(Error::DeadPoint(id))?;
        let p = slot.take().ok_or(Error::DeadPoint(id))?;
        self.live -= 1;
        Ok(p)
    }

    pub fn get(&self, id: PointId) -> Option<&Point> {
        self.slots.get(id.0 as usize).and_then(Option::as_ref)
    }

    pub fn contains(&self, id: PointId) -> bool {
        self.get(id).is_some()
    }

    /// Live points in id order.
    pub fn iter(&self) -> impl Iterator<Item = (PointId, &Point)> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.as_ref().map(|p| (PointId(i as u32), p)))
    }

    pub fn ids(&self) -> Vec<PointId> {
        self.iter().map(|(id, _)| id).collect()
    }

    /// Distance from a live point to `q`. Panics on a dead id.
    #[inline]
    pub fn dist(&self, id: PointId, q: &Point) -> f64 {
        let p = self.get(id).expect("live point");
        match (p, q) {
            (Point::Bits(a), Point::Bits(b)) => f64::from(a.hamming(b)),
            (Point::Real(a), Point::Real(b)) => match self.metric {
                Metric::Lp(pp) => lp_distance(pp, a, b),
                Metric::Hamming => unreachable!("real point in hamming dataset"),
            },
            _ => panic!("query incompatible with dataset"),
        }
    }
}

/// Ids of all live points within the closed ball of `radius` around `q`.
pub fn ball(ds: &Dataset, q: &Point, radius: f64) -> Result<Vec<PointId>> {
    ds.check(q)?;
    Ok(ds
        .iter()
        .filter(|(id, _)| ds.dist(*id, q) <= radius)
        .map(|(id, _)| id)
        .collect())
}

/// Ground truth for one query: which answers are acceptable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnVerdict {
    pub r_ball_nonempty: bool,
    pub cr_ball_nonempty: bool,
    pub cr_ball: Vec<PointId>,
}

impl AnnVerdict {
    /// Whether `answer` (None meaning ⊥) is a correct ANN response.
    pub fn accepts_point(&self, answer: Option<PointId>) -> bool {
        match answer {
            Some(id) => self.cr_ball.binary_search(&id).is_ok(),
            None => !self.r_ball_nonempty,
        }
    }

    /// Whether `bit` is a correct weak-decision response.
    pub fn accepts_decision(&self, bit: bool) -> bool {
        if bit {
            self.cr_ball_nonempty
        } else {
            !self.r_ball_nonempty
        }
    }

    /// The case where both decisions and both kinds of ANN answer are accepted.
    pub fn is_intermediate(&self) -> bool {
        !self.r_ball_nonempty && self.cr_ball_nonempty
    }
}

pub fn oracle_ann_verdicts(ds: &Dataset, q: &Point, params: &ProblemParams) -> Result<AnnVerdict> {
    ds.check(q)?;
    let mut r_nonempty = false;
    let mut cr_ball = Vec::new();
    for (id, _) in ds.iter() {
        let d = ds.dist(id, q);
        if d <= params.cr() {
            cr_ball.push(id);
            if d <= params.r {
                r_nonempty = true;
            }
        }
    }
    Ok(AnnVerdict {
        r_ball_nonempty: r_nonempty,
        cr_ball_nonempty: !cr_ball.is_empty(),
        cr_ball,
    })
}
