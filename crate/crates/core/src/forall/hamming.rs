//! A Hamming index sized so that one build answers every query in `{0,1}^d`.

use crate::budget::WorkBudget;
use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::lsh::{derive_params, AmplifiedLshIndex, LshParams};
use crate::metric::{Dataset, Point, PointId};
use crate::params::{ProblemParams, RhoFn, RhoMode};
use crate::rng::StreamRng;
use crate::search::{Answer, Response, Searcher};

#[derive(Clone, Debug, PartialEq)]
pub struct ForAllHammingIndex {
    index: AmplifiedLshIndex,
    params: ProblemParams,
    csamp: f64,
}

/// `L * ln(1 - p1^k)` and the required bound `-(2 ln n + d ln 2)`.
pub fn forall_log_check(lp: &LshParams, n: usize, dim: usize) -> (f64, f64) {
    let miss = (-lp.p1.powi(lp.k_concat as i32)).ln_1p();
    let lhs = lp.l_tables as f64 * miss;
    let rhs = -(2.0 * (n.max(1) as f64).ln() + dim as f64 * std::f64::consts::LN_2);
    (lhs, rhs)
}

/// Default exponent for sizing: `1/c`.
pub const DEFAULT_RHO: RhoMode = RhoMode::Formula(RhoFn::BitSampling);

impl ForAllHammingIndex {
    /// `k = ceil(log_{1/p2} n)`, `L = ceil(n^rho * d * ln n)`; fails if the
    /// union bound over all `2^d` queries does not hold.
    pub fn build(ds: Dataset, params: ProblemParams, rho: RhoMode, seed: u64, consts: &Constants) -> Result<Self> {
        let n = ds.len();
        let boost = ds.dim() as f64 * (n.max(1) as f64).ln();
        let lp = derive_params(&params, ds.dim(), n, boost, rho, seed)?;
        let (lhs, rhs) = forall_log_check(&lp, n, ds.dim());
        if !(lhs <= rhs) {
            return Err(Error::SizingViolation(format!(
                "L ln(1 - p1^k) = {lhs} exceeds -ln(n^2 2^d) = {rhs} (n={n}, d={}, k={}, L={})",
                ds.dim(),
                lp.k_concat,
                lp.l_tables
            )));
        }
        Ok(Self {
            index: AmplifiedLshIndex::build(ds, lp)?,
            params,
            csamp: consts.forall_csamp,
        })
    }

    pub fn index(&self) -> &AmplifiedLshIndex {
        &self.index
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    /// Full scan of all tables.
    pub fn query(&self, q: &Point) -> Result<Option<PointId>> {
        let ans = self.index.classic_query(q, self.params.cr())?;
        if let Some(id) = ans {
            assert!(self.index.dataset().dist(id, q) <= self.params.cr());
        }
        Ok(ans)
    }

    /// Number of tables probed by the sampled query.
    pub fn probes(&self) -> usize {
        let n = self.index.dataset().len().max(1) as f64;
        let m = (n.powf(self.index.params().rho) * n.ln() * self.csamp).ceil() as usize;
        m.clamp(1, self.index.num_tables())
    }

    /// Probes random tables first, then falls back to the full scan.
    pub fn query_sampled(&self, q: &Point, rng: &mut StreamRng) -> Result<Option<PointId>> {
        self.index.dataset().check(q)?;
        let l = self.index.num_tables();
        let tables: Vec<usize> = (0..self.probes()).map(|_| rng.index(l)).collect();
        let found = self
            .index
            .tables()
            .scan_tables(
                self.index.dataset(),
                q,
                self.params.cr(),
                &tables,
                &mut WorkBudget::unlimited(),
            )
            .expect("unlimited budget");
        match found {
            Some(id) => Ok(Some(id)),
            None => self.query(q),
        }
    }
}

impl Searcher for ForAllHammingIndex {
    fn query(&mut self, q: &Point, _rng: &mut StreamRng) -> Result<Response> {
        let mut budget = WorkBudget::unlimited();
        let ans = self
            .index
            .classic_query_budgeted(q, self.params.cr(), &mut budget)?
            .expect("unlimited budget");
        Ok(Response {
            answer: Answer::from_option(ans),
            charge: budget.spent(),
        })
    }

    fn insert(&mut self, p: Point) -> Result<PointId> {
        self.index.insert(p)
    }

    fn delete(&mut self, id: PointId) -> Result<()> {
        self.index.delete(id).map(|_| ())
    }

    fn dataset(&self) -> &Dataset {
        self.index.dataset()
    }
}
