//! The common query interface shared by every searcher the harness can drive.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lsh::AmplifiedLshIndex;
use crate::metric::{Dataset, Point, PointId};
use crate::params::ProblemParams;
use crate::rng::StreamRng;

/// What a searcher said about one query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Answer {
    Point(PointId),
    /// ⊥: no point claimed.
    Bottom,
    /// The work budget ran out first.
    Timeout,
    /// A weak-decision bit.
    Decision(bool),
}

impl Answer {
    pub fn point(self) -> Option<PointId> {
        match self {
            Answer::Point(id) => Some(id),
            _ => None,
        }
    }

    pub fn is_timeout(self) -> bool {
        matches!(self, Answer::Timeout)
    }

    pub(crate) fn from_option(o: Option<PointId>) -> Self {
        o.map_or(Answer::Bottom, Answer::Point)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Response {
    pub answer: Answer,
    /// Charge units spent answering.
    pub charge: u64,
}

/// A data structure the adversarial game can query and update.
///
/// `rng` is the fresh per-query stream; implementations must not keep it.
pub trait Searcher {
    fn query(&mut self, q: &Point, rng: &mut StreamRng) -> Result<Response>;
    fn insert(&mut self, p: Point) -> Result<PointId>;
    fn delete(&mut self, id: PointId) -> Result<()>;
    fn dataset(&self) -> &Dataset;
}

/// The unprotected classic index: first candidate within `cr`, no fresh randomness.
#[derive(Clone, Debug)]
pub struct ClassicSearcher {
    index: AmplifiedLshIndex,
    params: ProblemParams,
}

impl ClassicSearcher {
    pub fn new(index: AmplifiedLshIndex, params: ProblemParams) -> Self {
        Self { index, params }
    }

    pub fn index(&self) -> &AmplifiedLshIndex {
        &self.index
    }
}

impl Searcher for ClassicSearcher {
    fn query(&mut self, q: &Point, _rng: &mut StreamRng) -> Result<Response> {
        let mut budget = crate::budget::WorkBudget::unlimited();
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
