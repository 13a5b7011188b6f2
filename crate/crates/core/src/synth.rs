//! Synthetic Hamming instances for experiments and tests.

use crate::metric::{BitVector, Dataset, Metric, Point};
use crate::rng::StreamRng;

pub fn random_bits(d: usize, rng: &mut StreamRng) -> BitVector {
    let mut b = BitVector::zeros(d);
    for i in 0..d {
        b.set(i, rng.below(2) == 1);
    }
    b
}

/// `p` with exactly `count` distinct coordinates flipped.
pub fn at_distance(p: &BitVector, count: usize, rng: &mut StreamRng) -> BitVector {
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

/// `n` uniform points of `{0,1}^d`.
pub fn random_dataset(n: usize, d: usize, rng: &mut StreamRng) -> Dataset {
    let pts = (0..n).map(|_| Point::Bits(random_bits(d, rng))).collect();
    Dataset::from_points(Metric::Hamming, d, pts).expect("consistent points")
}

/// A query `q` with exactly `ball` points within `r` (at distances drawn
/// from `1..=floor(r)`) and `n - ball` points farther than `far`, shuffled.
pub fn planted_ball(n: usize, d: usize, r: f64, far: f64, ball: usize, rng: &mut StreamRng) -> (Dataset, Point) {
    assert!(ball <= n && r >= 1.0 && far < d as f64);
    let q = random_bits(d, rng);
    let mut pts = Vec::with_capacity(n);
    for _ in 0..ball {
        let k = 1 + rng.index(r.floor() as usize);
        pts.push(Point::Bits(at_distance(&q, k, rng)));
    }
    while pts.len() < n {
        let p = random_bits(d, rng);
        if f64::from(p.hamming(&q)) > far {
            pts.push(Point::Bits(p));
        }
    }
    for i in (1..pts.len()).rev() {
        let j = rng.index(i + 1);
        pts.swap(i, j);
    }
    (
        Dataset::from_points(Metric::Hamming, d, pts).expect("consistent points"),
        Point::Bits(q),
    )
}

/// Uniform random points plus one point at distance exactly `floor(r)` from
/// a fresh query, which is returned.
pub fn planted_instance(n: usize, d: usize, r: f64, rng: &mut StreamRng) -> (Dataset, Point) {
    let mut ds = random_dataset(n.saturating_sub(1), d, rng);
    let q = random_bits(d, rng);
    ds.push(Point::Bits(at_distance(&q, r.floor() as usize, rng)))
        .expect("hamming");
    (ds, Point::Bits(q))
}
