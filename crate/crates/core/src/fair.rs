//! Exact fair near-neighbor sampling over an amplified LSH index.
//!
//! A query draws a uniform entry from the multiset of `q`'s `L` buckets, so a
//! point colliding in `c(p)` tables is drawn with probability proportional to
//! `c(p)`; accepting it with probability `1/c(p)` makes every candidate equally
//! likely. Candidates farther than `r` are rejected. The output distribution is
//! therefore uniform over the r-near candidates and uses only the query stream.

use std::collections::HashMap;

use rustc_hash::FxBuildHasher;

use crate::budget::WorkBudget;
use crate::constants::Constants;
use crate::error::Result;
use crate::lsh::{derive_params, AmplifiedLshIndex, LshParams};
use crate::metric::{Dataset, Point, PointId};
use crate::params::{ProblemParams, RhoMode};
use crate::rng::StreamRng;
use crate::search::{Answer, Response, Searcher};

#[derive(Clone, Debug, PartialEq)]
pub struct FairIndex {
    index: AmplifiedLshIndex,
    params: ProblemParams,
    fallback_c: f64,
}

/// `ln(nQ)`, floored at 1 so tiny instances still get one table's worth.
pub(crate) fn log_nq(n: usize, queries: u64) -> f64 {
    ((n.max(1) as f64) * (queries as f64)).ln().max(1.0)
}

impl FairIndex {
    /// Builds with `L = ceil(n^rho * l_const * ln(nQ))` tables.
    pub fn build(ds: Dataset, params: ProblemParams, seed: u64, consts: &Constants) -> Result<Self> {
        let boost = consts.fair_l_const * log_nq(ds.len(), params.queries);
        let lp = derive_params(&params, ds.dim(), ds.len(), boost, RhoMode::Measured, seed)?;
        Self::with_lsh_params(ds, params, lp, consts)
    }

    pub fn with_lsh_params(ds: Dataset, params: ProblemParams, lp: LshParams, consts: &Constants) -> Result<Self> {
        Ok(Self {
            index: AmplifiedLshIndex::build(ds, lp)?,
            params,
            fallback_c: consts.fair_fallback_c,
        })
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn index(&self) -> &AmplifiedLshIndex {
        &self.index
    }

    pub fn lsh_params(&self) -> &LshParams {
        self.index.params()
    }

    fn max_rejections(&self) -> u64 {
        let l = self.index.num_tables() as f64;
        (self.fallback_c * l * log_nq(self.index.dataset().len(), self.params.queries)).ceil() as u64
    }

    /// One fair query. Returns a uniform member of the r-ball among the
    /// candidates, ⊥ when no candidate is within `r`, or TIMEOUT if `budget`
    /// runs out (in which case `budget.spent() == limit`).
    pub fn query(&self, q: &Point, rng: &mut StreamRng, budget: &mut WorkBudget) -> Result<Answer> {
        let ds = self.index.dataset();
        ds.check(q)?;
        let qb = q.as_bits().expect("hamming query");
        let tables = self.index.tables();
        let l = tables.num_tables();
        if budget.charge(l as u64).is_err() {
            return Ok(Answer::Timeout);
        }

        let mut buf = Vec::new();
        let mut buckets: Vec<Vec<PointId>> = Vec::with_capacity(l);
        let mut counts: HashMap<PointId, u32, FxBuildHasher> = HashMap::default();
        for t in 0..l {
            let b = tables.bucket_of(t, qb, &mut buf).to_vec();
            for &id in &b {
                *counts.entry(id).or_insert(0) += 1;
            }
            buckets.push(b);
        }
        let total: usize = buckets.iter().map(Vec::len).sum();
        if total == 0 {
            return Ok(Answer::Bottom);
        }
        let mut prefix = Vec::with_capacity(l);
        let mut acc = 0usize;
        for b in &buckets {
            acc += b.len();
            prefix.push(acc);
        }

        let r = self.params.r;
        let limit = self.max_rejections();
        let mut rejections = 0u64;
        while rejections < limit {
            let u = rng.index(total);
            let t = prefix.partition_point(|&end| end <= u);
            let start = if t == 0 { 0 } else { prefix[t - 1] };
            let id = buckets[t][u - start];
            let c = counts[&id];
            if c > 1 && rng.below(u64::from(c)) != 0 {
                rejections += 1;
                continue;
            }
            if budget.charge(1).is_err() {
                return Ok(Answer::Timeout);
            }
            if ds.dist(id, q) <= r {
                return Ok(Answer::Point(id));
            }
            rejections += 1;
        }

        // Exhaustive fallback over the distinct candidates.
        let mut near = Vec::new();
        for cand in tables.candidates(qb) {
            if budget.charge(1).is_err() {
                return Ok(Answer::Timeout);
            }
            if ds.dist(cand.id, q) <= r {
                near.push(cand.id);
            }
        }
        if near.is_empty() {
            Ok(Answer::Bottom)
        } else {
            Ok(Answer::Point(near[rng.index(near.len())]))
        }
    }

    pub fn insert(&mut self, p: Point) -> Result<PointId> {
        self.index.insert(p)
    }

    pub fn delete(&mut self, id: PointId) -> Result<Point> {
        self.index.delete(id)
    }
}

impl Searcher for FairIndex {
    fn query(&mut self, q: &Point, rng: &mut StreamRng) -> Result<Response> {
        let mut budget = WorkBudget::unlimited();
        let answer = FairIndex::query(self, q, rng, &mut budget)?;
        Ok(Response {
            answer,
            charge: budget.spent(),
        })
    }

    fn insert(&mut self, p: Point) -> Result<PointId> {
        FairIndex::insert(self, p)
    }

    fn delete(&mut self, id: PointId) -> Result<()> {
        FairIndex::delete(self, id).map(|_| ())
    }

    fn dataset(&self) -> &Dataset {
        self.index.dataset()
    }
}
