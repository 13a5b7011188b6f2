use std::collections::hash_map::Entry;
use std::collections::HashMap;

use rustc_hash::FxBuildHasher;

use crate::budget::{Exhausted, WorkBudget};
use crate::metric::{BitVector, Dataset, Point, PointId};
use crate::rng::StreamRng;

pub(crate) type Key = Box<[u64]>;
pub(crate) type BucketMap = HashMap<Key, Vec<PointId>, FxBuildHasher>;

/// A candidate with the number of tables in which it collides with the query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub id: PointId,
    pub collisions: u32,
}

/// `L` hash tables, each keyed by `k` sampled coordinates.
///
/// Tables store ids only; distances are resolved against a [`Dataset`].
#[derive(Clone, Debug, PartialEq)]
pub struct LshTables {
    dim: usize,
    k: usize,
    coords: Vec<Vec<u32>>,
    buckets: Vec<BucketMap>,
}

impl LshTables {
    /// Samples `l` amplified functions of `k` coordinates each, with replacement.
    pub fn sample(dim: usize, k: usize, l: usize, rng: &mut StreamRng) -> Self {
        let coords = (0..l)
            .map(|_| (0..k).map(|_| rng.index(dim) as u32).collect())
            .collect();
        Self {
            dim,
            k,
            coords,
            buckets: (0..l).map(|_| BucketMap::default()).collect(),
        }
    }

    pub(crate) fn from_parts(dim: usize, k: usize, coords: Vec<Vec<u32>>, buckets: Vec<BucketMap>) -> Self {
        Self {
            dim,
            k,
            coords,
            buckets,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_tables(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self, table: usize) -> &[u32] {
        &self.coords[table]
    }

    pub(crate) fn bucket_map(&self, table: usize) -> &BucketMap {
        &self.buckets[table]
    }

    fn words(&self) -> usize {
        self.k.div_ceil(64).max(1)
    }

    /// Evaluates amplified function `table` on `x` into `buf`.
    #[inline]
    pub fn key_into(&self, table: usize, x: &BitVector, buf: &mut Vec<u64>) {
        buf.clear();
        buf.resize(self.words(), 0);
        for (j, &c) in self.coords[table].iter().enumerate() {
            if x.get(c as usize) {
                buf[j / 64] |= 1u64 << (j % 64);
            }
        }
    }

    pub fn key(&self, table: usize, x: &BitVector) -> Vec<u64> {
        let mut buf = Vec::new();
        self.key_into(table, x, &mut buf);
        buf
    }

    /// The bucket of `table` that `x` hashes to.
    pub fn bucket_of(&self, table: usize, x: &BitVector, buf: &mut Vec<u64>) -> &[PointId] {
        self.key_into(table, x, buf);
        self.buckets[table]
            .get(buf.as_slice())
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn insert(&mut self, id: PointId, x: &BitVector) {
        let mut buf = Vec::new();
        for t in 0..self.coords.len() {
            self.key_into(t, x, &mut buf);
            match self.buckets[t].get_mut(buf.as_slice()) {
                Some(v) => v.push(id),
                None => {
                    self.buckets[t].insert(buf.clone().into_boxed_slice(), vec![id]);
                }
            }
        }
    }

    /// Removes `id` from every table. Returns whether it was present everywhere.
    pub fn remove(&mut self, id: PointId, x: &BitVector) -> bool {
        let mut buf = Vec::new();
        let mut all = true;
        for t in 0..self.coords.len() {
            self.key_into(t, x, &mut buf);
            let key: Key = buf.clone().into_boxed_slice();
            match self.buckets[t].entry(key) {
                Entry::Occupied(mut e) => {
                    let v = e.get_mut();
                    match v.iter().position(|&i| i == id) {
                        Some(pos) => {
                            v.remove(pos);
                        }
                        None => all = false,
                    }
                    if v.is_empty() {
                        e.remove();
                    }
                }
                Entry::Vacant(_) => all = false,
            }
        }
        all
    }

    /// Hashes every live point of `ds`.
    pub fn insert_all(&mut self, ds: &Dataset) {
        for b in &mut self.buckets {
            b.reserve(ds.len());
        }
        for (id, p) in ds.iter() {
            if let Point::Bits(b) = p {
                self.insert(id, b);
            }
        }
    }

    /// Every id sharing a bucket with `q` in at least one table, with exact
    /// collision counts, in first-appearance order (table-major, bucket order).
    pub fn candidates(&self, q: &BitVector) -> Vec<Candidate> {
        let mut order: Vec<Candidate> = Vec::new();
        let mut slot: HashMap<PointId, usize, FxBuildHasher> = HashMap::default();
        let mut buf = Vec::new();
        for t in 0..self.coords.len() {
            for &id in self.bucket_of(t, q, &mut buf) {
                match slot.entry(id) {
                    Entry::Occupied(e) => order[*e.get()].collisions += 1,
                    Entry::Vacant(e) => {
                        e.insert(order.len());
                        order.push(Candidate { id, collisions: 1 });
                    }
                }
            }
        }
        order
    }

    /// Number of tables where `x` and `q` hash identically, by direct evaluation.
    pub fn collisions_between(&self, x: &BitVector, q: &BitVector) -> u32 {
        let mut a = Vec::new();
        let mut b = Vec::new();
        (0..self.coords.len())
            .filter(|&t| {
                self.key_into(t, x, &mut a);
                self.key_into(t, q, &mut b);
                a == b
            })
            .count() as u32
    }

    /// Table-major scan for the first candidate within `radius` of `q`.
    ///
    /// Charges one unit per table hashed and one per distinct candidate
    /// whose distance is evaluated.
    pub fn scan(
        &self,
        ds: &Dataset,
        q: &Point,
        radius: f64,
        budget: &mut WorkBudget,
    ) -> Result<Option<PointId>, Exhausted> {
        let Point::Bits(qb) = q else {
            return Ok(None);
        };
        let mut seen = vec![0u64; ds.capacity_ids().div_ceil(64)];
        let mut buf = Vec::new();
        for t in 0..self.coords.len() {
            budget.charge(1)?;
            for &id in self.bucket_of(t, qb, &mut buf) {
                let (w, b) = (id.0 as usize / 64, id.0 % 64);
                if seen[w] >> b & 1 == 1 {
                    continue;
                }
                seen[w] |= 1 << b;
                budget.charge(1)?;
                if ds.dist(id, q) <= radius {
                    return Ok(Some(id));
                }
            }
        }
        Ok(None)
    }

    /// Like [`scan`](Self::scan) but restricted to the given tables, in order.
    pub fn scan_tables(
        &self,
        ds: &Dataset,
        q: &Point,
        radius: f64,
        tables: &[usize],
        budget: &mut WorkBudget,
    ) -> Result<Option<PointId>, Exhausted> {
        let Point::Bits(qb) = q else {
            return Ok(None);
        };
        let mut buf = Vec::new();
        for &t in tables {
            budget.charge(1)?;
            for &id in self.bucket_of(t, qb, &mut buf) {
                budget.charge(1)?;
                if ds.dist(id, q) <= radius {
                    return Ok(Some(id));
                }
            }
        }
        Ok(None)
    }

    /// Total number of stored (table, id) entries.
    pub fn entries(&self) -> usize {
        self.buckets
            .iter()
            .map(|m| m.values().map(Vec::len).sum::<usize>())
            .sum()
    }
}
