//! The adaptive query game: an adversary picks each query from the history,
//! the searcher answers with fresh per-round randomness, and a brute-force
//! oracle judges every answer against the current dataset.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{oracle_ann_verdicts, AnnVerdict, Dataset, Point, PointId};
use crate::params::ProblemParams;
use crate::rng::{StreamId, StreamRng};
use crate::search::{Answer, Searcher};

#[derive(Clone, Debug, PartialEq)]
pub enum UpdateOp {
    Insert(Point),
    Delete(PointId),
}

/// Updates applied after the given round, fixed before the game starts.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct UpdateSchedule {
    after_round: BTreeMap<u64, Vec<UpdateOp>>,
}

impl UpdateSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, after_round: u64, op: UpdateOp) {
        self.after_round.entry(after_round).or_default().push(op);
    }

    pub fn ops_after(&self, round: u64) -> &[UpdateOp] {
        self.after_round.get(&round).map_or(&[], Vec::as_slice)
    }

    pub fn is_empty(&self) -> bool {
        self.after_round.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct GameConfig {
    pub params: ProblemParams,
    /// Master seed; round `i` uses the stream `("query", i)`.
    pub seed: u64,
    pub schedule: UpdateSchedule,
}

/// One round of the game.
#[derive(Clone, Debug, PartialEq)]
pub struct Round {
    pub round: u64,
    pub query: Point,
    pub answer: Answer,
    pub correct: bool,
    pub charge: u64,
}

#[derive(Serialize, Deserialize)]
struct RoundRecord<'a> {
    round: u64,
    query: String,
    answer: Answer,
    verdict: &'a str,
    charge: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transcript {
    pub rounds: Vec<Round>,
    pub adversary_won: bool,
    /// Set when the searcher itself returned an error.
    pub error: Option<String>,
}

impl Transcript {
    /// One JSON object per round.
    pub fn write_jsonl(&self, mut w: impl Write) -> std::io::Result<()> {
        for r in &self.rounds {
            let rec = RoundRecord {
                round: r.round,
                query: r.query.render(),
                answer: r.answer,
                verdict: if r.correct { "correct" } else { "wrong" },
                charge: r.charge,
            };
            serde_json::to_writer(&mut w, &rec).map_err(std::io::Error::other)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn total_charge(&self) -> u64 {
        self.rounds.iter().map(|r| r.charge).sum()
    }
}

/// What an adversary may look at: the history, the current dataset and the
/// public parameters. Seeds and internal state of the searcher are not shown.
pub struct View<'a> {
    pub history: &'a [Round],
    pub dataset: &'a Dataset,
    pub params: &'a ProblemParams,
}

pub trait Adversary {
    fn name(&self) -> &'static str;
    fn next_query(&mut self, view: &View<'_>) -> Point;
}

/// Judges `answer` against the verdict.
pub fn judge(v: &AnnVerdict, answer: Answer) -> bool {
    match answer {
        Answer::Point(id) => v.accepts_point(Some(id)),
        Answer::Bottom => v.accepts_point(None),
        Answer::Timeout => false,
        Answer::Decision(b) => v.accepts_decision(b),
    }
}

/// Applies one update to both the searcher and the reference dataset.
fn apply(op: &UpdateOp, searcher: &mut dyn Searcher, reference: &mut Dataset) -> Result<()> {
    match op {
        UpdateOp::Insert(p) => {
            let a = searcher.insert(p.clone())?;
            let b = reference.push(p.clone())?;
            if a != b {
                return Err(Error::InvalidParameter(format!(
                    "searcher assigned id {a}, reference assigned {b}"
                )));
            }
        }
        UpdateOp::Delete(id) => {
            searcher.delete(*id)?;
            reference.remove(*id)?;
        }
    }
    Ok(())
}

/// Plays up to `params.queries` rounds, stopping at the first wrong answer.
pub fn run_game(searcher: &mut dyn Searcher, adversary: &mut dyn Adversary, cfg: &GameConfig) -> Result<Transcript> {
    let mut reference = searcher.dataset().clone();
    let mut rounds = Vec::new();
    for i in 0..cfg.params.queries {
        let q = adversary.next_query(&View {
            history: &rounds,
            dataset: &reference,
            params: &cfg.params,
        });
        let verdict = oracle_ann_verdicts(&reference, &q, &cfg.params)?;
        let mut rng = StreamRng::new(cfg.seed, StreamId::derive("query", &[i]));
        let resp = match searcher.query(&q, &mut rng) {
            Ok(r) => r,
            Err(e) => {
                return Ok(Transcript {
                    rounds,
                    adversary_won: true,
                    error: Some(e.to_string()),
                })
            }
        };
        let correct = judge(&verdict, resp.answer);
        rounds.push(Round {
            round: i,
            query: q,
            answer: resp.answer,
            correct,
            charge: resp.charge,
        });
        if !correct {
            return Ok(Transcript {
                rounds,
                adversary_won: true,
                error: None,
            });
        }
        for op in cfg.schedule.ops_after(i) {
            if let Err(e) = apply(op, searcher, &mut reference) {
                return Ok(Transcript {
                    rounds,
                    adversary_won: true,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    Ok(Transcript {
        rounds,
        adversary_won: false,
        error: None,
    })
}

/// Seed of game `g` under a master seed.
pub fn game_seed(master: u64, g: u64) -> u64 {
    StreamId::derive("game", &[master, g]).0
}
