//! Adversarial games and the statistical drivers around them.

pub mod adversary;
pub mod game;
pub mod stats;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{ball, Dataset, Point, PointId};
use crate::rng::{StreamId, StreamRng};
use crate::search::{Answer, Searcher};

pub use adversary::{make_adversary, BucketProber, ObliviousRandom, RepeatPerturb, ReplayWorst};
pub use game::{game_seed, judge, run_game, Adversary, GameConfig, Round, Transcript, UpdateOp, UpdateSchedule, View};
pub use stats::{chi_square_homogeneity, chi_square_uniform, wilson_interval, ChiSquareReport, Z95};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub ball: Vec<PointId>,
    pub counts: Vec<u64>,
    /// Answers that were ⊥ or TIMEOUT.
    pub empty_answers: u64,
    /// Answers outside the r-ball.
    pub outside: u64,
    pub chi_square: Option<ChiSquareReport>,
    /// Set when the test could not be run.
    pub notice: Option<String>,
}

/// Queries `q` `trials` times with streams `("query", t)` under `seed` and
/// tests the answers for uniformity over the r-ball.
pub fn fairness_test(
    searcher: &mut dyn Searcher,
    ds: &Dataset,
    q: &Point,
    r: f64,
    trials: u64,
    seed: u64,
) -> Result<FairnessReport> {
    let members = ball(ds, q, r)?;
    if members.is_empty() {
        return Ok(FairnessReport {
            ball: members,
            counts: Vec::new(),
            empty_answers: 0,
            outside: 0,
            chi_square: None,
            notice: Some("r-ball is empty; uniformity test skipped".into()),
        });
    }
    if trials < 10 * members.len() as u64 {
        return Err(Error::Underpowered(format!(
            "{trials} trials for a ball of {} points; need at least {}",
            members.len(),
            10 * members.len()
        )));
    }
    let mut counts = vec![0u64; members.len()];
    let (mut empty, mut outside) = (0, 0);
    for t in 0..trials {
        let mut rng = StreamRng::new(seed, StreamId::derive("query", &[t]));
        match searcher.query(q, &mut rng)?.answer {
            Answer::Point(id) => match members.binary_search(&id) {
                Ok(i) => counts[i] += 1,
                Err(_) => outside += 1,
            },
            _ => empty += 1,
        }
    }
    let chi = chi_square_uniform(&counts);
    Ok(FairnessReport {
        ball: members,
        counts,
        empty_answers: empty,
        outside,
        chi_square: Some(chi),
        notice: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureRate {
    pub games: u64,
    pub failures: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub fn failure_rate(transcripts: &[Transcript]) -> FailureRate {
    let games = transcripts.len() as u64;
    let failures = transcripts.iter().filter(|t| t.adversary_won).count() as u64;
    let (lo, hi) = wilson_interval(failures, games, Z95);
    FailureRate {
        games,
        failures,
        rate: if games == 0 {
            0.0
        } else {
            failures as f64 / games as f64
        },
        ci_low: lo,
        ci_high: hi,
    }
}

/// Plays `games` independent games in parallel. `setup(g, seed)` builds the
/// searcher, adversary and configuration of game `g` from its derived seed.
/// Results come back in game order.
pub fn run_games<F>(games: u64, master_seed: u64, setup: F) -> Result<Vec<Transcript>>
where
    F: Fn(u64, u64) -> Result<(Box<dyn Searcher>, Box<dyn Adversary>, GameConfig)> + Sync,
{
    (0..games)
        .into_par_iter()
        .map(|g| {
            let (mut s, mut a, cfg) = setup(g, game_seed(master_seed, g))?;
            run_game(s.as_mut(), a.as_mut(), &cfg)
        })
        .collect()
}

/// Answers from the brute-force ball: a uniform r-neighbor, else ⊥.
pub struct OracleSearcher {
    ds: Dataset,
    r: f64,
}

impl OracleSearcher {
    pub fn new(ds: Dataset, r: f64) -> Self {
        Self { ds, r }
    }
}

impl Searcher for OracleSearcher {
    fn query(&mut self, q: &Point, rng: &mut StreamRng) -> Result<crate::search::Response> {
        let b = ball(&self.ds, q, self.r)?;
        let answer = if b.is_empty() {
            Answer::Bottom
        } else {
            Answer::Point(b[rng.index(b.len())])
        };
        Ok(crate::search::Response {
            answer,
            charge: self.ds.len() as u64,
        })
    }

    fn insert(&mut self, p: Point) -> Result<PointId> {
        self.ds.push(p)
    }

    fn delete(&mut self, id: PointId) -> Result<()> {
        self.ds.remove(id).map(|_| ())
    }

    fn dataset(&self) -> &Dataset {
        &self.ds
    }
}

/// Always answers ⊥.
pub struct BottomSearcher {
    ds: Dataset,
}

impl BottomSearcher {
    pub fn new(ds: Dataset) -> Self {
        Self { ds }
    }
}

impl Searcher for BottomSearcher {
    fn query(&mut self, _q: &Point, _rng: &mut StreamRng) -> Result<crate::search::Response> {
        Ok(crate::search::Response {
            answer: Answer::Bottom,
            charge: 0,
        })
    }

    fn insert(&mut self, p: Point) -> Result<PointId> {
        self.ds.push(p)
    }

    fn delete(&mut self, id: PointId) -> Result<()> {
        self.ds.remove(id).map(|_| ())
    }

    fn dataset(&self) -> &Dataset {
        &self.ds
    }
}
