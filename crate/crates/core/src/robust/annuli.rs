//! Concentric-annuli search.
//!
//! The shell between `r` and `cr` is cut at radii `r_i = c'^i r` with
//! `c' = c^(1/k)`. Annulus `i` runs a fair sampler for `(c', r_{i-1})`. On a
//! query, each annulus estimates, with Laplace noise, how often a fresh
//! instance finishes within a truncation budget, and the smallest annulus
//! that looks fast is run to completion.

use crate::budget::WorkBudget;
use crate::constants::Constants;
use crate::dp::laplace_sample;
use crate::error::{Error, Result};
use crate::fair::{log_nq, FairIndex};
use crate::metric::{ball, Dataset, Point, PointId};
use crate::params::ProblemParams;
use crate::rng::{StreamId, StreamRng};
use crate::search::{Answer, Response, Searcher};

/// Largest testing pool built per annulus.
pub const MAX_POOL: u64 = 100_000;

struct Annulus {
    params: ProblemParams,
    pool: Vec<FairIndex>,
    exec: FairIndex,
    rho: f64,
    trunc: u64,
    relaxed_budget: u64,
}

pub struct AnnuliIndex {
    params: ProblemParams,
    consts: Constants,
    seed: u64,
    k: usize,
    c_prime: f64,
    radii: Vec<f64>,
    annuli: Vec<Annulus>,
    s: u64,
    tau: f64,
    noise: bool,
    queries_used: u64,
    ds: Dataset,
}

/// `r_i = c'^i * r` for `i = 0..=k`.
pub fn annulus_radii(r: f64, c: f64, k: usize) -> Vec<f64> {
    let cp = c.powf(1.0 / k as f64);
    let mut out = Vec::with_capacity(k + 1);
    let mut x = r;
    out.push(x);
    for _ in 0..k {
        x *= cp;
        out.push(x);
    }
    out
}

/// Default pool size `m * L` and sample count `s`.
pub fn annuli_sizes(queries: u64, delta: f64, k: usize, consts: &Constants) -> (u64, u64) {
    let q = queries as f64;
    let eta = consts.annuli_eta;
    let lg = (q * k as f64 / delta).ln();
    let m = (lg / (eta * eta)).ceil();
    let l = (consts.annuli_l_coeff * (1.0 / delta).ln().powf(1.5) * (2.0 * q).sqrt()).ceil();
    let pool = consts.annuli_pool.unwrap_or((m * l).min(u64::MAX as f64) as u64);
    let s = consts.annuli_s.unwrap_or((2.0 / eta * lg).ceil() as u64);
    (pool, s.max(1))
}

impl AnnuliIndex {
    pub fn build(ds: Dataset, params: ProblemParams, k: usize, seed: u64, consts: &Constants) -> Result<Self> {
        let (pool, s) = annuli_sizes(params.queries, params.delta, k.max(1), consts);
        Self::build_inner(ds, params, k, seed, consts, pool, s)
    }

    /// Execution instances only, for the relaxed query.
    pub fn build_relaxed(ds: Dataset, params: ProblemParams, k: usize, seed: u64, consts: &Constants) -> Result<Self> {
        Self::build_inner(ds, params, k, seed, consts, 0, 1)
    }

    fn build_inner(
        ds: Dataset,
        params: ProblemParams,
        k: usize,
        seed: u64,
        consts: &Constants,
        pool: u64,
        s: u64,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("annulus count must be at least 1".into()));
        }
        if pool > MAX_POOL {
            return Err(Error::InvalidParameter(format!(
                "testing pool of {pool} instances per annulus exceeds {MAX_POOL}; set annuli_pool"
            )));
        }
        let c_prime = params.c.powf(1.0 / k as f64);
        let radii = annulus_radii(params.r, params.c, k);
        let n = ds.len();
        let nf = n.max(1) as f64;
        let lognq = log_nq(n, params.queries).ceil();
        let mut annuli = Vec::with_capacity(k);
        for i in 1..=k {
            let ap = ProblemParams::new(params.metric, c_prime, radii[i - 1], params.queries, params.delta)?;
            let exec_seed = StreamId::derive("exec", &[seed, i as u64]).0;
            let exec = FairIndex::build(ds.clone(), ap, exec_seed, consts)?;
            let rho = exec.lsh_params().rho;
            let pool = (0..pool)
                .map(|j| {
                    let s = StreamId::derive("grid", &[seed, i as u64, j]).0;
                    FairIndex::build(ds.clone(), ap, s, consts)
                })
                .collect::<Result<Vec<_>>>()?;
            let trunc = (consts.annuli_trunc_coeff * (nf.powf(1.0 / k as f64) + nf.powf(rho)) * lognq).ceil() as u64;
            let relaxed_budget = (consts.relaxed_budget_coeff * nf.powf(rho.max(1.0 / k as f64))).ceil() as u64;
            annuli.push(Annulus {
                params: ap,
                pool,
                exec,
                rho,
                trunc,
                relaxed_budget,
            });
        }
        Ok(Self {
            params,
            consts: consts.clone(),
            seed,
            k,
            c_prime,
            radii,
            annuli,
            s,
            tau: consts.annuli_tau(),
            noise: true,
            queries_used: 0,
            ds,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn c_prime(&self) -> f64 {
        self.c_prime
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn samples(&self) -> u64 {
        self.s
    }

    pub fn threshold(&self) -> f64 {
        self.tau
    }

    pub fn set_noise(&mut self, on: bool) {
        self.noise = on;
    }

    /// Truncation budget of annulus `i` (1-based).
    pub fn trunc_budget(&self, i: usize) -> u64 {
        self.annuli[i - 1].trunc
    }

    pub fn relaxed_budget(&self, i: usize) -> u64 {
        self.annuli[i - 1].relaxed_budget
    }

    pub fn annulus_rho(&self, i: usize) -> f64 {
        self.annuli[i - 1].rho
    }

    pub fn annulus_params(&self, i: usize) -> &ProblemParams {
        &self.annuli[i - 1].params
    }

    /// A freshly seeded fair instance of annulus `i`, as a pool member would be.
    pub fn fresh_instance(&self, i: usize, seed: u64) -> Result<FairIndex> {
        FairIndex::build(self.ds.clone(), self.annuli[i - 1].params, seed, &self.consts)
    }

    /// Whether a pool run of `fi` on `q` finishes within annulus `i`'s budget.
    pub fn finishes(&self, i: usize, fi: &FairIndex, q: &Point, rng: &mut StreamRng) -> Result<bool> {
        let mut budget = WorkBudget::limited(self.annuli[i - 1].trunc);
        Ok(!fi.query(q, rng, &mut budget)?.is_timeout())
    }

    /// Noisy finishing-rate estimates `p̂_i`, one per annulus.
    pub fn estimate(&self, q: &Point, rng: &mut StreamRng, budget: &mut WorkBudget) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.k);
        for a in &self.annuli {
            if a.pool.is_empty() {
                return Err(Error::InvalidParameter("index was built without testing pools".into()));
            }
            let mut done = 0u64;
            for _ in 0..self.s {
                let j = rng.index(a.pool.len());
                let mut run = WorkBudget::limited(a.trunc);
                if !a.pool[j].query(q, rng, &mut run)?.is_timeout() {
                    done += 1;
                }
                let _ = budget.charge(run.spent());
            }
            let mut p = done as f64 / self.s as f64;
            if self.noise {
                p += laplace_sample(1.0 / self.s as f64, rng);
            }
            out.push(p);
        }
        Ok(out)
    }

    fn take_query(&mut self) -> Result<()> {
        if self.queries_used >= self.params.queries {
            return Err(Error::QueryBudgetExceeded(self.params.queries));
        }
        self.queries_used += 1;
        Ok(())
    }

    /// Full query: flag annuli with `p̂_i >= tau`, run the smallest flagged one.
    /// Also returns the flag vector.
    pub fn query_detailed(
        &mut self,
        q: &Point,
        rng: &mut StreamRng,
        budget: &mut WorkBudget,
    ) -> Result<(Vec<bool>, Answer)> {
        self.ds.check(q)?;
        self.take_query()?;
        let est = self.estimate(q, rng, budget)?;
        let flags: Vec<bool> = est.iter().map(|&p| p >= self.tau).collect();
        let Some(i) = flags.iter().position(|&f| f) else {
            return Ok((flags, Answer::Bottom));
        };
        let mut run = WorkBudget::unlimited();
        let ans = self.annuli[i].exec.query(q, rng, &mut run)?;
        let _ = budget.charge(run.spent());
        if let Answer::Point(id) = ans {
            let d = self.ds.dist(id, q);
            assert!(d <= self.radii[i + 1] * (1.0 + 1e-12) && d <= self.params.cr());
        }
        Ok((flags, ans))
    }

    /// Relaxed fair query: annuli in order, each with a fixed budget; the first
    /// run that does not time out answers. Returns the answering annulus (1-based).
    pub fn relaxed_query(
        &self,
        q: &Point,
        rng: &mut StreamRng,
        budget: &mut WorkBudget,
    ) -> Result<(Option<usize>, Answer)> {
        self.ds.check(q)?;
        for (i, a) in self.annuli.iter().enumerate() {
            let mut run = WorkBudget::limited(a.relaxed_budget);
            let ans = a.exec.query(q, rng, &mut run)?;
            let _ = budget.charge(run.spent());
            if !ans.is_timeout() {
                if let Answer::Point(id) = ans {
                    assert!(self.ds.dist(id, q) <= self.params.cr());
                }
                return Ok((Some(i + 1), ans));
            }
        }
        Ok((None, Answer::Bottom))
    }

    pub fn insert(&mut self, p: Point) -> Result<PointId> {
        let id = self.ds.push(p.clone())?;
        for a in &mut self.annuli {
            for f in a.pool.iter_mut().chain(std::iter::once(&mut a.exec)) {
                let got = f.insert(p.clone())?;
                debug_assert_eq!(got, id);
            }
        }
        Ok(id)
    }

    pub fn delete(&mut self, id: PointId) -> Result<()> {
        self.ds.remove(id)?;
        for a in &mut self.annuli {
            for f in a.pool.iter_mut().chain(std::iter::once(&mut a.exec)) {
                f.delete(id)?;
            }
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl Searcher for AnnuliIndex {
    fn query(&mut self, q: &Point, rng: &mut StreamRng) -> Result<Response> {
        let mut budget = WorkBudget::unlimited();
        let (_, answer) = self.query_detailed(q, rng, &mut budget)?;
        Ok(Response {
            answer,
            charge: budget.spent(),
        })
    }

    fn insert(&mut self, p: Point) -> Result<PointId> {
        AnnuliIndex::insert(self, p)
    }

    fn delete(&mut self, id: PointId) -> Result<()> {
        AnnuliIndex::delete(self, id)
    }

    fn dataset(&self) -> &Dataset {
        &self.ds
    }
}

/// The first `i` in `0..k` with `n(q, r_{i+1}) <= n^(1/k) * n(q, r_i)`, where
/// `n(q, x)` counts points within `x`. Exists whenever `n(q, r) >= 1`.
pub fn telescoping_witness(ds: &Dataset, q: &Point, r: f64, c: f64, k: usize) -> Result<Option<usize>> {
    let radii = annulus_radii(r, c, k);
    let counts = radii
        .iter()
        .map(|&x| ball(ds, q, x).map(|b| b.len() as f64))
        .collect::<Result<Vec<_>>>()?;
    let bound = (ds.len().max(1) as f64).powf(1.0 / k as f64);
    Ok((0..k).find(|&i| counts[i] > 0.0 && counts[i + 1] <= bound * counts[i]))
}
