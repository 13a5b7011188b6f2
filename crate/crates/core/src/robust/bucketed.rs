//! Bucketing search: the dataset is split into segments, each guarded by a
//! robust decider; only segments that answer 1 are scanned exhaustively.

use crate::budget::WorkBudget;
use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::lsh::{bit_sampling_probs, measured_rho};
use crate::metric::{Dataset, Point, PointId};
use crate::params::ProblemParams;
use crate::rng::StreamRng;
use crate::search::{Answer, Response, Searcher};

use super::decider::{CopyMode, RobustDecider};

struct Segment {
    decider: RobustDecider,
    /// Global id of each local id.
    global: Vec<PointId>,
}

pub struct BucketedIndex {
    params: ProblemParams,
    consts: Constants,
    mode: CopyMode,
    seed: u64,
    alpha: f64,
    ds: Dataset,
    segments: Vec<Segment>,
    /// (segment, local id) for each global id ever assigned.
    owner: Vec<Option<(usize, PointId)>>,
}

/// `alpha = 1 / (2 - rho)`.
pub fn bucketing_alpha(rho: f64) -> f64 {
    1.0 / (2.0 - rho)
}

/// `kappa = ceil(n^(1 - alpha))`, at least one segment for a nonempty set.
pub fn segment_count(n: usize, alpha: f64) -> usize {
    if n == 0 {
        0
    } else {
        ((n as f64).powf(1.0 - alpha).ceil() as usize).clamp(1, n)
    }
}

impl BucketedIndex {
    pub fn build(ds: Dataset, params: ProblemParams, seed: u64, consts: &Constants) -> Result<Self> {
        Self::build_with_mode(ds, params, seed, consts, CopyMode::Lsh)
    }

    /// `CopyMode::Oracle` replaces every decider copy by a brute-force check.
    pub fn build_with_mode(
        ds: Dataset,
        params: ProblemParams,
        seed: u64,
        consts: &Constants,
        mode: CopyMode,
    ) -> Result<Self> {
        let (p1, p2) = bit_sampling_probs(ds.dim(), params.r, params.cr())?;
        let alpha = bucketing_alpha(measured_rho(p1, p2));
        let n = ds.len();
        let kappa = segment_count(n, alpha);
        let mut me = Self {
            params,
            consts: consts.clone(),
            mode,
            seed,
            alpha,
            ds: Dataset::new(ds.metric(), ds.dim())?,
            segments: Vec::new(),
            owner: Vec::new(),
        };
        if kappa == 0 {
            return Ok(me);
        }
        let per = n.div_ceil(kappa);
        let live: Vec<(PointId, Point)> = ds.iter().map(|(id, p)| (id, p.clone())).collect();
        let mut owner = vec![None; ds.capacity_ids()];
        let mut segs = Vec::new();
        for (j, chunk) in live.chunks(per).enumerate() {
            let local_ds = Dataset::from_points(ds.metric(), ds.dim(), chunk.iter().map(|(_, p)| p.clone()).collect())?;
            for (local, (gid, _)) in chunk.iter().enumerate() {
                owner[gid.0 as usize] = Some((j, PointId(local as u32)));
            }
            segs.push(Segment {
                decider: me.make_decider(local_ds, j, kappa)?,
                global: chunk.iter().map(|(gid, _)| *gid).collect(),
            });
        }
        me.ds = ds;
        me.segments = segs;
        me.owner = owner;
        Ok(me)
    }

    fn make_decider(&self, local: Dataset, j: usize, kappa: usize) -> Result<RobustDecider> {
        let mut p = self.params;
        p.delta = self.params.delta / kappa.max(1) as f64;
        let seed = crate::rng::StreamId::derive("segment", &[self.seed, j as u64]).0;
        RobustDecider::build_with_mode(local, p, seed, &self.consts, self.mode)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn num_segments(&self) -> usize {
        self.segments.len()
    }

    pub fn segment_sizes(&self) -> Vec<usize> {
        self.segments.iter().map(|s| s.decider.dataset().len()).collect()
    }

    /// Segment and local id of a live global id.
    pub fn owner_of(&self, id: PointId) -> Option<(usize, PointId)> {
        self.owner.get(id.0 as usize).copied().flatten()
    }

    pub fn decider(&self, j: usize) -> &RobustDecider {
        &self.segments[j].decider
    }

    pub fn set_noise(&mut self, on: bool) {
        for s in &mut self.segments {
            s.decider.set_noise(on);
        }
    }

    pub fn query_budgeted(
        &mut self,
        q: &Point,
        rng: &mut StreamRng,
        budget: &mut WorkBudget,
    ) -> Result<Option<PointId>> {
        self.ds.check(q)?;
        let cr = self.params.cr();
        for seg in &mut self.segments {
            if !seg.decider.decide(q, rng, budget)? {
                continue;
            }
            let local = seg.decider.dataset();
            for (lid, _) in local.iter() {
                let _ = budget.charge(1);
                if local.dist(lid, q) <= cr {
                    let gid = seg.global[lid.0 as usize];
                    assert!(self.ds.dist(gid, q) <= cr);
                    return Ok(Some(gid));
                }
            }
        }
        Ok(None)
    }

    pub fn insert(&mut self, p: Point) -> Result<PointId> {
        self.ds.check(&p)?;
        if self.segments.is_empty() {
            let empty = Dataset::new(self.ds.metric(), self.ds.dim())?;
            let d = self.make_decider(empty, 0, 1)?;
            self.segments.push(Segment {
                decider: d,
                global: Vec::new(),
            });
        }
        let j = (0..self.segments.len())
            .min_by_key(|&j| self.segments[j].decider.dataset().len())
            .expect("at least one segment");
        let gid = self.ds.push(p.clone())?;
        let seg = &mut self.segments[j];
        let lid = seg.decider.insert(p)?;
        debug_assert_eq!(lid.0 as usize, seg.global.len());
        seg.global.push(gid);
        self.owner.push(Some((j, lid)));
        Ok(gid)
    }

    pub fn delete(&mut self, id: PointId) -> Result<()> {
        let (j, lid) = self.owner_of(id).ok_or(Error::DeadPoint(id))?;
        self.segments[j].decider.delete(lid)?;
        self.ds.remove(id)?;
        self.owner[id.0 as usize] = None;
        Ok(())
    }
}

impl Searcher for BucketedIndex {
    fn query(&mut self, q: &Point, rng: &mut StreamRng) -> Result<Response> {
        let mut budget = WorkBudget::unlimited();
        let ans = self.query_budgeted(q, rng, &mut budget)?;
        Ok(Response {
            answer: Answer::from_option(ans),
            charge: budget.spent(),
        })
    }

    fn insert(&mut self, p: Point) -> Result<PointId> {
        BucketedIndex::insert(self, p)
    }

    fn delete(&mut self, id: PointId) -> Result<()> {
        BucketedIndex::delete(self, id)
    }

    fn dataset(&self) -> &Dataset {
        &self.ds
    }
}
