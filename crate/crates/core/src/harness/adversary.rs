//! Concrete query strategies. None of them is claimed optimal; they are
//! demonstrations of what an adaptive query source can do.
//!
//! All strategies are deterministic given their construction seed and the
//! history they are shown.

use crate::metric::{BitVector, Dataset, Point, PointId};
use crate::rng::{StreamId, StreamRng};
use crate::search::Answer;

use super::game::{Adversary, View};

fn flip_distinct(p: &BitVector, count: usize, rng: &mut StreamRng) -> BitVector {
    let d = p.dim();
    let mut idx: Vec<usize> = (0..d).collect();
    let mut b = p.clone();
    for i in 0..count.min(d) {
        let j = i + rng.index(d - i);
        idx.swap(i, j);
        b.flip(idx[i]);
    }
    b
}

fn random_live(ds: &Dataset, rng: &mut StreamRng) -> Option<BitVector> {
    let ids = ds.ids();
    if ids.is_empty() {
        return None;
    }
    let id = ids[rng.index(ids.len())];
    ds.get(id).and_then(Point::as_bits).cloned()
}

fn random_bits(d: usize, rng: &mut StreamRng) -> BitVector {
    let mut b = BitVector::zeros(d);
    for i in 0..d {
        b.set(i, rng.below(2) == 1);
    }
    b
}

/// A data point moved by exactly `floor(r)` bits, or a random point if the
/// dataset is empty.
fn planted(ds: &Dataset, r: f64, rng: &mut StreamRng) -> Point {
    match random_live(ds, rng) {
        Some(p) => Point::Bits(flip_distinct(&p, r.floor() as usize, rng)),
        None => Point::Bits(random_bits(ds.dim(), rng)),
    }
}

/// Queries independent of all answers: a random data point moved by `floor(r)`.
pub struct ObliviousRandom {
    seed: u64,
}

impl ObliviousRandom {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }
}

impl Adversary for ObliviousRandom {
    fn name(&self) -> &'static str {
        "oblivious-random"
    }

    fn next_query(&mut self, view: &View<'_>) -> Point {
        let mut rng = StreamRng::new(self.seed, StreamId::derive("adversary", &[view.history.len() as u64]));
        planted(view.dataset, view.params.r, &mut rng)
    }
}

/// Re-issues queries near points the searcher has returned, hoping to
/// correlate with its internal randomness.
pub struct RepeatPerturb {
    seed: u64,
}

impl RepeatPerturb {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }
}

impl Adversary for RepeatPerturb {
    fn name(&self) -> &'static str {
        "repeat-perturb"
    }

    fn next_query(&mut self, view: &View<'_>) -> Point {
        let mut rng = StreamRng::new(self.seed, StreamId::derive("adversary", &[view.history.len() as u64]));
        let last_point = view
            .history
            .iter()
            .rev()
            .filter_map(|r| r.answer.point())
            .find_map(|id| view.dataset.get(id).and_then(Point::as_bits));
        match last_point {
            Some(p) => {
                let k = 1 + rng.index(view.params.r.floor().max(1.0) as usize);
                Point::Bits(flip_distinct(p, k, &mut rng))
            }
            None => planted(view.dataset, view.params.r, &mut rng),
        }
    }
}

/// Learns which coordinates a single-table bit-sampling index reads.
///
/// It targets the most isolated data point `p` and queries `p` with one
/// coordinate flipped at a time. A coordinate that the index samples moves
/// the query out of `p`'s bucket, so the index cannot see `p`, although `p`
/// is at distance 1. Once such a coordinate is known the adversary keeps
/// sending that query; if none is found it falls back to the probe sequence.
pub struct BucketProber {
    target: Option<PointId>,
    next_bit: usize,
    sampled: Vec<usize>,
}

impl BucketProber {
    pub fn new() -> Self {
        Self {
            target: None,
            next_bit: 0,
            sampled: Vec::new(),
        }
    }

    /// Coordinates found to be read by the index so far.
    pub fn learned(&self) -> &[usize] {
        &self.sampled
    }

    fn pick_target(ds: &Dataset) -> Option<PointId> {
        let pts: Vec<(PointId, &BitVector)> = ds.iter().filter_map(|(id, p)| p.as_bits().map(|b| (id, b))).collect();
        pts.iter()
            .map(|&(id, b)| {
                let nearest = pts
                    .iter()
                    .filter(|(o, _)| *o != id)
                    .map(|(_, x)| x.hamming(b))
                    .min()
                    .unwrap_or(u32::MAX);
                (nearest, std::cmp::Reverse(id), id)
            })
            .max()
            .map(|(_, _, id)| id)
    }

    fn probe(p: &BitVector, bit: usize) -> Point {
        let mut b = p.clone();
        b.flip(bit);
        Point::Bits(b)
    }
}

impl Default for BucketProber {
    fn default() -> Self {
        Self::new()
    }
}

impl Adversary for BucketProber {
    fn name(&self) -> &'static str {
        "bucket-prober"
    }

    fn next_query(&mut self, view: &View<'_>) -> Point {
        if self.target.is_none_or(|t| !view.dataset.contains(t)) {
            self.target = Self::pick_target(view.dataset);
            self.next_bit = 0;
            self.sampled.clear();
        }
        let Some(t) = self.target else {
            return Point::Bits(BitVector::zeros(view.dataset.dim()));
        };
        let p = view
            .dataset
            .get(t)
            .and_then(Point::as_bits)
            .expect("hamming target")
            .clone();
        let d = p.dim();

        // learn from the previous probe
        if let (Some(last), true) = (view.history.last(), self.sampled.is_empty()) {
            if self.next_bit > 0 && self.next_bit <= d && last.answer != Answer::Point(t) {
                self.sampled.push(self.next_bit - 1);
            }
        }
        if let Some(&bit) = self.sampled.first() {
            return Self::probe(&p, bit);
        }
        let bit = self.next_bit % d;
        self.next_bit = bit + 1;
        Self::probe(&p, bit)
    }
}

/// Replays the query the searcher got wrong, if any, else the hardest one
/// seen so far (largest distance to its nearest r-neighbor); every other
/// round it plants a fresh query at distance exactly `floor(r)`.
pub struct ReplayWorst {
    seed: u64,
}

impl ReplayWorst {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }
}

impl Adversary for ReplayWorst {
    fn name(&self) -> &'static str {
        "replay-worst"
    }

    fn next_query(&mut self, view: &View<'_>) -> Point {
        let i = view.history.len();
        if let Some(bad) = view.history.iter().find(|r| !r.correct) {
            return bad.query.clone();
        }
        if i % 2 == 1 {
            let ds = view.dataset;
            let r = view.params.r;
            let hardness = |q: &Point| {
                ds.iter()
                    .map(|(id, _)| ds.dist(id, q))
                    .filter(|&d| d <= r)
                    .fold(f64::NEG_INFINITY, f64::max)
            };
            let mut best: Option<(f64, usize)> = None;
            for (j, round) in view.history.iter().enumerate() {
                let h = hardness(&round.query);
                if best.is_none_or(|(bh, _)| h > bh) {
                    best = Some((h, j));
                }
            }
            if let Some((_, j)) = best {
                return view.history[j].query.clone();
            }
        }
        let mut rng = StreamRng::new(self.seed, StreamId::derive("adversary", &[i as u64]));
        planted(view.dataset, view.params.r, &mut rng)
    }
}

/// Strategy names accepted by [`make_adversary`].
pub const STRATEGIES: [&str; 4] = ["oblivious-random", "repeat-perturb", "bucket-prober", "replay-worst"];

pub fn make_adversary(name: &str, seed: u64) -> Option<Box<dyn Adversary>> {
    Some(match name {
        "oblivious-random" => Box::new(ObliviousRandom::new(seed)),
        "repeat-perturb" => Box::new(RepeatPerturb::new(seed)),
        "bucket-prober" => Box::new(BucketProber::new()),
        "replay-worst" => Box::new(ReplayWorst::new(seed)),
        _ => return None,
    })
}
