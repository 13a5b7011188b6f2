use rayon::prelude::*;
use serde::Serialize;

use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::forall::hamming::DEFAULT_RHO;
use crate::forall::ForAllHammingIndex;
use crate::harness::{
    failure_rate, fairness_test, make_adversary, run_games, BottomSearcher, FailureRate, GameConfig, OracleSearcher,
    Transcript, UpdateOp, UpdateSchedule,
};
use crate::lsh::{derive_params, AmplifiedLshIndex};
use crate::metric::{oracle_ann_verdicts, BitVector, Dataset, Point};
use crate::params::{ProblemParams, RhoMode};
use crate::rng::{StreamId, StreamRng};
use crate::robust::{exponent_optimize, AnnuliIndex, BucketedIndex, RobustDecider};
use crate::search::{ClassicSearcher, Searcher};
use crate::{fair::FairIndex, synth};

use super::config::{ExperimentConfig, Kind, ProblemSection, Source};
use super::output::{Artifact, Csv};

#[derive(Serialize)]
pub struct Provenance<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub kind: Kind,
    pub seed: u64,
    pub problem: &'a ProblemSection,
    pub constants: &'a Constants,
}

fn provenance(cfg: &ExperimentConfig) -> Provenance<'_> {
    Provenance {
        tool: "robann",
        version: env!("CARGO_PKG_VERSION"),
        kind: cfg.kind,
        seed: cfg.seed,
        problem: &cfg.problem,
        constants: &cfg.constants,
    }
}

fn derived(tag: &str, seed: u64) -> u64 {
    StreamId::derive(tag, &[seed]).0
}

/// Builds the named searcher over `ds`.
pub fn make_searcher(
    name: &str,
    ds: Dataset,
    params: ProblemParams,
    seed: u64,
    consts: &Constants,
    annuli_k: usize,
) -> Result<Box<dyn Searcher>> {
    Ok(match name {
        "fair" => Box::new(FairIndex::build(ds, params, seed, consts)?),
        "classic" | "classic-single" => {
            let mut lp = derive_params(&params, ds.dim(), ds.len(), 1.0, RhoMode::Measured, seed)?;
            if name == "classic-single" {
                lp.l_tables = 1;
            }
            Box::new(ClassicSearcher::new(AmplifiedLshIndex::build(ds, lp)?, params))
        }
        "decider" => Box::new(RobustDecider::build(ds, params, seed, consts)?),
        "bucketed" => Box::new(BucketedIndex::build(ds, params, seed, consts)?),
        "annuli" => Box::new(AnnuliIndex::build(ds, params, annuli_k, seed, consts)?),
        "forall" => Box::new(ForAllHammingIndex::build(ds, params, DEFAULT_RHO, seed, consts)?),
        "oracle" => Box::new(OracleSearcher::new(ds, params.r)),
        "bottom" => Box::new(BottomSearcher::new(ds)),
        other => return Err(Error::InvalidParameter(format!("unknown searcher {other:?}"))),
    })
}

fn load_dataset(cfg: &ExperimentConfig, seed: u64, file: Option<&Dataset>) -> Dataset {
    let mut rng = StreamRng::new(seed, StreamId::derive("data", &[]));
    match cfg.data.source {
        Source::Random => synth::random_dataset(cfg.data.n, cfg.data.dim, &mut rng),
        Source::Planted => synth::planted_instance(cfg.data.n, cfg.data.dim, cfg.problem.r, &mut rng).0,
        Source::File => file.expect("dataset loaded").clone(),
    }
}

fn read_file_dataset(cfg: &ExperimentConfig) -> Result<Option<Dataset>> {
    match (&cfg.data.source, &cfg.data.path) {
        (Source::File, Some(p)) => {
            let f = std::fs::File::open(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            Ok(Some(crate::io::read_dataset(std::io::BufReader::new(f))?))
        }
        _ => Ok(None),
    }
}

/// Oblivious updates fixed before the game: random inserts and oldest-first deletes.
fn schedule(ds: &Dataset, rounds: u64, insert_every: u64, delete_every: u64, seed: u64) -> UpdateSchedule {
    let mut s = UpdateSchedule::new();
    let mut rng = StreamRng::new(seed, StreamId::derive("updates", &[]));
    let mut live: std::collections::VecDeque<_> = ds.ids().into();
    let mut next = ds.next_id();
    for i in 0..rounds {
        if insert_every > 0 && (i + 1) % insert_every == 0 {
            s.push(i, UpdateOp::Insert(Point::Bits(synth::random_bits(ds.dim(), &mut rng))));
            live.push_back(next);
            next.0 += 1;
        }
        if delete_every > 0 && (i + 1) % delete_every == 0 {
            if let Some(id) = live.pop_front() {
                s.push(i, UpdateOp::Delete(id));
            }
        }
    }
    s
}

#[derive(Serialize)]
struct GameSummary<'a> {
    provenance: Provenance<'a>,
    searcher: &'a str,
    adversary: &'a str,
    failure: FailureRate,
    errors: u64,
    rounds_mean: f64,
    charge_mean: f64,
    charge_max: u64,
}

fn games_table(transcripts: &[Transcript]) -> Csv {
    let mut csv = Csv::new(&["game", "rounds", "adversary_won", "total_charge", "error"]);
    for (g, t) in transcripts.iter().enumerate() {
        csv.row(&[
            &g,
            &t.rounds.len(),
            &t.adversary_won,
            &t.total_charge(),
            &t.error.as_deref().unwrap_or("").replace(',', ";"),
        ]);
    }
    csv
}

fn transcripts_jsonl(transcripts: &[Transcript]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for (g, t) in transcripts.iter().enumerate() {
        let mut buf = Vec::new();
        t.write_jsonl(&mut buf)?;
        for line in buf.split(|&b| b == b'\n').filter(|l| !l.is_empty()) {
            out.extend_from_slice(format!("{{\"game\":{g},").as_bytes());
            out.extend_from_slice(&line[1..]);
            out.push(b'\n');
        }
    }
    Ok(out)
}

fn charge_stats(transcripts: &[Transcript]) -> (f64, f64, u64) {
    let rounds: Vec<&crate::harness::Round> = transcripts.iter().flat_map(|t| &t.rounds).collect();
    let n = rounds.len().max(1) as f64;
    let mean = rounds.iter().map(|r| r.charge as f64).sum::<f64>() / n;
    let max = rounds.iter().map(|r| r.charge).max().unwrap_or(0);
    let rm = rounds.len() as f64 / transcripts.len().max(1) as f64;
    (rm, mean, max)
}

fn run_game_kind(
    cfg: &ExperimentConfig,
    searcher: &str,
    adversary: &str,
    games: u64,
    name: &str,
) -> Result<Vec<Artifact>> {
    let params = cfg.problem.params()?;
    let file = read_file_dataset(cfg)?;
    let g = &cfg.game;
    let transcripts = run_games(games, cfg.seed, |_, gs| {
        let ds = load_dataset(cfg, derived("data-seed", gs), file.as_ref());
        let sched = schedule(
            &ds,
            params.queries,
            g.insert_every,
            g.delete_every,
            derived("updates", gs),
        );
        let s = make_searcher(
            searcher,
            ds,
            params,
            derived("setup-seed", gs),
            &cfg.constants,
            g.annuli_k,
        )?;
        let a = make_adversary(adversary, derived("adversary", gs)).expect("validated");
        Ok((
            s,
            a,
            GameConfig {
                params,
                seed: gs,
                schedule: sched,
            },
        ))
    })?;
    let (rounds_mean, charge_mean, charge_max) = charge_stats(&transcripts);
    let summary = GameSummary {
        provenance: provenance(cfg),
        searcher,
        adversary,
        failure: failure_rate(&transcripts),
        errors: transcripts.iter().filter(|t| t.error.is_some()).count() as u64,
        rounds_mean,
        charge_mean,
        charge_max,
    };
    Ok(vec![
        games_table(&transcripts).finish(&format!("{name}.csv")),
        Artifact {
            name: "transcripts.jsonl".into(),
            bytes: transcripts_jsonl(&transcripts)?,
        },
        Artifact::json("summary.json", &summary),
    ])
}

#[derive(Serialize)]
struct FairnessSummary<'a> {
    provenance: Provenance<'a>,
    instances: u64,
    passed: u64,
    min_p_value: f64,
    significance: f64,
}

fn run_fairness(cfg: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let params = cfg.problem.params()?;
    let f = &cfg.fairness;
    let rows = (0..f.instances)
        .into_par_iter()
        .map(|i| {
            let seed = StreamId::derive("instance", &[cfg.seed, i]).0;
            let b = f.ball_sizes[i as usize % f.ball_sizes.len()];
            let mut rng = StreamRng::new(seed, StreamId::derive("data", &[]));
            let (ds, q) = synth::planted_ball(cfg.data.n, cfg.data.dim, params.r, params.cr(), b, &mut rng);
            let mut fi = FairIndex::build(ds.clone(), params, derived("setup-seed", seed), &cfg.constants)?;
            let rep = fairness_test(&mut fi, &ds, &q, params.r, f.trials, seed)?;
            Ok((i, rep))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut csv = Csv::new(&[
        "instance",
        "ball_size",
        "statistic",
        "dof",
        "p_value",
        "empty_answers",
        "outside",
    ]);
    let mut min_p = 1.0f64;
    let mut passed = 0;
    for (i, rep) in &rows {
        let chi = rep.chi_square.expect("planted ball is nonempty");
        min_p = min_p.min(chi.p_value);
        if chi.p_value > 1e-3 {
            passed += 1;
        }
        csv.row(&[
            i,
            &rep.ball.len(),
            &chi.statistic,
            &chi.dof,
            &chi.p_value,
            &rep.empty_answers,
            &rep.outside,
        ]);
    }
    let summary = FairnessSummary {
        provenance: provenance(cfg),
        instances: f.instances,
        passed,
        min_p_value: min_p,
        significance: 1e-3,
    };
    Ok(vec![
        csv.finish("fairness.csv"),
        Artifact::json("summary.json", &summary),
    ])
}

#[derive(Serialize)]
struct BetaSummary<'a> {
    provenance: Provenance<'a>,
    rows: usize,
}

/// `rho,c,k_star,beta,k_crossover` rows.
pub fn beta_table(cs: &[f64], rhos: &[crate::params::RhoFn]) -> Csv {
    let mut csv = Csv::new(&["rho", "c", "k_star", "beta", "k_crossover"]);
    for &rho in rhos {
        for &c in cs {
            let r = exponent_optimize(c, rho);
            csv.row(&[&rho, &c, &r.k_star, &r.beta, &r.k_crossover]);
        }
    }
    csv
}

fn run_beta(cfg: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let cs = cfg.beta.grid()?;
    let csv = beta_table(&cs, &cfg.beta.rho);
    let summary = BetaSummary {
        provenance: provenance(cfg),
        rows: cs.len() * cfg.beta.rho.len(),
    };
    Ok(vec![csv.finish("beta.csv"), Artifact::json("summary.json", &summary)])
}

fn all_queries(d: usize) -> impl Iterator<Item = Point> {
    (0u64..1 << d).map(move |m| {
        let mut b = BitVector::zeros(d);
        for i in 0..d {
            b.set(i, (m >> i) & 1 == 1);
        }
        Point::Bits(b)
    })
}

/// Number of the `2^d` queries a fresh for-all build gets wrong.
pub fn forall_wrong_queries(n: usize, d: usize, params: ProblemParams, seed: u64, consts: &Constants) -> Result<u64> {
    let mut rng = StreamRng::new(seed, StreamId::derive("data", &[]));
    let ds = synth::random_dataset(n, d, &mut rng);
    let idx = ForAllHammingIndex::build(ds.clone(), params, DEFAULT_RHO, derived("setup-seed", seed), consts)?;
    let mut wrong = 0;
    for q in all_queries(d) {
        let v = oracle_ann_verdicts(&ds, &q, &params)?;
        if !v.accepts_point(idx.query(&q)?) {
            wrong += 1;
        }
    }
    Ok(wrong)
}

#[derive(Serialize)]
struct ForallDim {
    dim: usize,
    builds: u64,
    perfect_builds: u64,
}

#[derive(Serialize)]
struct ForallSummary<'a> {
    provenance: Provenance<'a>,
    dims: Vec<ForallDim>,
}

fn run_forall(cfg: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let params = cfg.problem.params()?;
    let f = &cfg.forall;
    let mut csv = Csv::new(&["dim", "build", "queries", "wrong_queries"]);
    let mut dims = Vec::new();
    for &d in &f.dims {
        if d > 20 {
            return Err(Error::InvalidParameter(format!(
                "forall.dims: {d} is too large to enumerate"
            )));
        }
        let wrong = (0..f.builds)
            .into_par_iter()
            .map(|b| {
                let seed = StreamId::derive("build", &[cfg.seed, d as u64, b]).0;
                forall_wrong_queries(f.n, d, params, seed, &cfg.constants)
            })
            .collect::<Result<Vec<_>>>()?;
        for (b, w) in wrong.iter().enumerate() {
            csv.row(&[&d, &b, &(1u64 << d), w]);
        }
        dims.push(ForallDim {
            dim: d,
            builds: f.builds,
            perfect_builds: wrong.iter().filter(|&&w| w == 0).count() as u64,
        });
    }
    let summary = ForallSummary {
        provenance: provenance(cfg),
        dims,
    };
    Ok(vec![csv.finish("forall.csv"), Artifact::json("summary.json", &summary)])
}

/// Runs the configured experiment and returns its output files.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<Artifact>> {
    match cfg.kind {
        Kind::Game => run_game_kind(cfg, &cfg.game.searcher, &cfg.game.adversary, cfg.game.games, "games"),
        Kind::DeciderAccuracy => run_game_kind(cfg, "decider", &cfg.decider.adversary, cfg.decider.games, "decider"),
        Kind::Fairness => run_fairness(cfg),
        Kind::BetaCurve => run_beta(cfg),
        Kind::ForallExhaustive => run_forall(cfg),
    }
}

pub const SCHEMA: &str = "\
games.csv / decider.csv (kinds game, decider-accuracy)
  game           game index, 0-based
  rounds         rounds played (the game stops at the first wrong answer)
  adversary_won  true if some answer was wrong or the searcher failed
  total_charge   charge units spent over all rounds
  error          searcher error message, if any
transcripts.jsonl (kinds game, decider-accuracy)
  one JSON object per round: game, round, query, answer, verdict, charge
fairness.csv (kind fairness)
  instance       instance index
  ball_size      points within r of the query
  statistic      Pearson chi-square statistic against the uniform distribution
  dof            degrees of freedom
  p_value        upper-tail probability
  empty_answers  answers that were bottom or timeout
  outside        answers outside the r-ball
beta.csv (kind beta-curve, command beta)
  rho            exponent function: hamming_opt, l2_opt or bit_sampling
  c              approximation factor
  k_star         annulus count minimizing max(rho(c^(1/k)), 1/k)
  beta           the minimum value
  k_crossover    real k where rho(c^(1/k)) = 1/k
forall.csv (kind forall-exhaustive)
  dim            dimension d
  build          build index
  queries        2^d, every query enumerated
  wrong_queries  queries answered incorrectly
summary.json (every kind)
  provenance     tool, version, kind, seed, problem, resolved constants
";
