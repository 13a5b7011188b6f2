//! The robust weak decider: many independently seeded classic indices, a
//! random subsample of which vote on every query, with Laplace noise added
//! to the vote before thresholding.

use crate::budget::WorkBudget;
use crate::constants::Constants;
use crate::dp::{decider_constants, laplace_sample, DeciderConstants};
use crate::error::{Error, Result};
use crate::lsh::{derive_params, LshParams, LshTables};
use crate::metric::{Dataset, Point, PointId};
use crate::params::{ProblemParams, RhoMode};
use crate::rng::{StreamId, StreamRng};
use crate::search::{Answer, Response, Searcher};

/// How the individual copies decide.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CopyMode {
    /// Classic LSH scan for a point within `cr`.
    Lsh,
    /// Brute force over the dataset; used to test the surrounding wiring.
    Oracle,
}

#[derive(Clone, Debug)]
pub struct RobustDecider {
    params: ProblemParams,
    consts: DeciderConstants,
    lsh: LshParams,
    ds: Dataset,
    copies: Vec<LshTables>,
    mode: CopyMode,
    noise: bool,
    queries_used: u64,
}

impl RobustDecider {
    pub fn build(ds: Dataset, params: ProblemParams, seed: u64, consts: &Constants) -> Result<Self> {
        Self::build_with_mode(ds, params, seed, consts, CopyMode::Lsh)
    }

    pub fn build_with_mode(
        ds: Dataset,
        params: ProblemParams,
        seed: u64,
        consts: &Constants,
        mode: CopyMode,
    ) -> Result<Self> {
        let dc = decider_constants(&params, consts);
        let lsh = derive_params(
            &params,
            ds.dim(),
            ds.len(),
            consts.oblivious_boost,
            RhoMode::Measured,
            seed,
        )?;
        let copies = match mode {
            CopyMode::Lsh => (0..dc.copies)
                .map(|i| {
                    let mut rng = StreamRng::new(seed, StreamId::derive("setup", &[i]));
                    let mut t = LshTables::sample(ds.dim(), lsh.k_concat, lsh.l_tables, &mut rng);
                    t.insert_all(&ds);
                    t
                })
                .collect(),
            CopyMode::Oracle => Vec::new(),
        };
        Ok(Self {
            params,
            consts: dc,
            lsh,
            ds,
            copies,
            mode,
            noise: true,
            queries_used: 0,
        })
    }

    /// Disables the Laplace term; only for testing the threshold logic.
    pub fn set_noise(&mut self, on: bool) {
        self.noise = on;
    }

    pub fn constants(&self) -> DeciderConstants {
        self.consts
    }

    pub fn lsh_params(&self) -> &LshParams {
        &self.lsh
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn queries_used(&self) -> u64 {
        self.queries_used
    }

    pub fn dataset(&self) -> &Dataset {
        &self.ds
    }

    /// The answer of copy `j` alone.
    pub fn copy_answer(&self, j: usize, q: &Point, budget: &mut WorkBudget) -> bool {
        match self.mode {
            CopyMode::Lsh => self.copies[j]
                .scan(&self.ds, q, self.params.cr(), budget)
                .expect("unlimited budget")
                .is_some(),
            CopyMode::Oracle => self.ds.iter().any(|(id, _)| {
                let _ = budget.charge(1);
                self.ds.dist(id, q) <= self.params.cr()
            }),
        }
    }

    /// Subsampled vote fraction `N` before noise.
    fn vote(&self, q: &Point, rng: &mut StreamRng, budget: &mut WorkBudget) -> f64 {
        let k = self.consts.k_sub;
        let n_copies = self.consts.copies;
        let mut cache: Vec<Option<bool>> = vec![None; n_copies as usize];
        let mut yes = 0u64;
        for _ in 0..k {
            let j = rng.below(n_copies) as usize;
            let a = match cache[j] {
                Some(a) => a,
                None => {
                    let a = self.copy_answer(j, q, budget);
                    cache[j] = Some(a);
                    a
                }
            };
            yes += u64::from(a);
        }
        yes as f64 / k as f64
    }

    /// One robust decision, counted against the query budget.
    pub fn decide(&mut self, q: &Point, rng: &mut StreamRng, budget: &mut WorkBudget) -> Result<bool> {
        self.ds.check(q)?;
        if self.queries_used >= self.params.queries {
            return Err(Error::QueryBudgetExceeded(self.params.queries));
        }
        self.queries_used += 1;
        let n = self.vote(q, rng, budget);
        let noisy = if self.noise {
            n + laplace_sample(1.0 / self.consts.k_sub as f64, rng)
        } else {
            n
        };
        Ok(noisy > 0.5)
    }

    pub fn insert(&mut self, p: Point) -> Result<PointId> {
        let id = self.ds.push(p)?;
        let b = self.ds.get(id).and_then(Point::as_bits).expect("hamming");
        for t in &mut self.copies {
            t.insert(id, b);
        }
        Ok(id)
    }

    pub fn delete(&mut self, id: PointId) -> Result<Point> {
        let p = self.ds.remove(id)?;
        let b = p.as_bits().expect("hamming");
        for t in &mut self.copies {
            t.remove(id, b);
        }
        Ok(p)
    }
}

impl Searcher for RobustDecider {
    fn query(&mut self, q: &Point, rng: &mut StreamRng) -> Result<Response> {
        let mut budget = WorkBudget::unlimited();
        let bit = self.decide(q, rng, &mut budget)?;
        Ok(Response {
            answer: Answer::Decision(bit),
            charge: budget.spent(),
        })
    }

    fn insert(&mut self, p: Point) -> Result<PointId> {
        RobustDecider::insert(self, p)
    }

    fn delete(&mut self, id: PointId) -> Result<()> {
        RobustDecider::delete(self, id).map(|_| ())
    }

    fn dataset(&self) -> &Dataset {
        &self.ds
    }
}
