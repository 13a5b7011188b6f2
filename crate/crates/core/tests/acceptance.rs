//! Acceptance suite: one test per acceptance criterion, each printing a single
//! PASS/FAIL line. Tolerances and sizes are pinned below.

#![allow(clippy::excessive_precision)]

use std::time::Instant;

use rayon::prelude::*;

use robann::budget::WorkBudget;
use robann::cli::{self, ExperimentConfig};
use robann::constants::Constants;
use robann::dp::{
    advanced_composition, decider_constants, decider_constants_formula, laplace_cdf, laplace_sample,
    subsampling_amplification, subsampling_requirement,
};
use robann::fair::FairIndex;
use robann::forall::{grid_count_log_bound, rho_prime, GridCovering};
use robann::harness::stats::ks_statistic;
use robann::harness::{
    chi_square_homogeneity, failure_rate, fairness_test, run_games, BucketProber, GameConfig, ReplayWorst,
    UpdateSchedule,
};
use robann::metric::{ball, Point};
use robann::params::{ProblemParams, RhoFn};
use robann::rng::{StreamId, StreamRng};
use robann::robust::{exponent_optimize, telescoping_witness, AnnuliIndex, BucketedIndex, RobustDecider};
use robann::search::{Answer, Searcher};
use robann::synth;

/// Chi-square significance level for every uniformity/homogeneity test.
const CHI_P: f64 = 1e-3;
/// Relative agreement required against the high-precision references.
const REL_12: f64 = 5e-12;

fn report(name: &str, pass: bool, detail: &str) {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
}

fn rel_close(got: f64, want: f64) -> bool {
    if want == 0.0 {
        got == 0.0
    } else {
        ((got - want) / want).abs() <= REL_12
    }
}

fn rng(seed: u64, tag: &str) -> StreamRng {
    StreamRng::new(seed, StreamId::derive(tag, &[]))
}

#[test]
fn exponent_values() {
    let t = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    for c in [4.0, 10.0] {
        let rep = exponent_optimize(c, RhoFn::HammingOpt);
        let hit = rep.beta == 1.0 / 3.0;
        ok &= hit;
        lines.push(format!("c={c}: beta={} (k*={})", rep.beta, rep.k_star));
    }
    let secs = t.elapsed().as_secs_f64();
    ok &= secs < 1.0;
    report("exponent values", ok, &format!("{}; {secs:.3}s", lines.join(", ")));
    assert!(ok, "beta must be exactly 1/3 at c=4 and c=10: {lines:?}");
}

fn fairness_params() -> ProblemParams {
    ProblemParams::hamming(2.0, 2.0, 100, 1e-3).unwrap()
}

#[test]
fn fairness_uniformity() {
    const INSTANCES: u64 = 20;
    const TRIALS: u64 = 10_000;
    let t = Instant::now();
    let params = fairness_params();
    let consts = Constants::default();
    let results: Vec<(usize, f64)> = (0..INSTANCES)
        .into_par_iter()
        .map(|i| {
            let ball_size = [2, 3, 5][i as usize % 3];
            let n = 100 + 5 * i as usize;
            let (ds, q) = synth::planted_ball(n, 16, params.r, params.cr(), ball_size, &mut rng(i, "fairness-data"));
            let mut fi = FairIndex::build(ds.clone(), params, 1000 + i, &consts).unwrap();
            let rep = fairness_test(&mut fi, &ds, &q, params.r, TRIALS, 2000 + i).unwrap();
            assert_eq!(rep.outside, 0);
            (ball_size, rep.chi_square.unwrap().p_value)
        })
        .collect();
    let min_p = results.iter().map(|r| r.1).fold(1.0, f64::min);
    let passed = results.iter().filter(|r| r.1 > CHI_P).count();
    let secs = t.elapsed().as_secs_f64();
    let ok = passed == INSTANCES as usize && secs < 120.0;
    report(
        "fairness uniformity",
        ok,
        &format!("{passed}/{INSTANCES} instances p > {CHI_P}, min p = {min_p:.4}; {secs:.1}s"),
    );
    assert!(ok);
}

#[test]
fn setup_independence() {
    const SEEDS: u64 = 20;
    const TRIALS: u64 = 10_000;
    let params = fairness_params();
    let consts = Constants::default();
    let (ds, q) = synth::planted_ball(150, 16, params.r, params.cr(), 5, &mut rng(7, "independence-data"));
    let counts: Vec<Vec<u64>> = (0..SEEDS)
        .into_par_iter()
        .map(|s| {
            let mut fi = FairIndex::build(ds.clone(), params, StreamId::derive("setup-seed", &[s]).0, &consts).unwrap();
            fairness_test(&mut fi, &ds, &q, params.r, TRIALS, 99).unwrap().counts
        })
        .collect();
    let mut min_p: f64 = 1.0;
    let mut bad = 0;
    for a in 0..counts.len() {
        for b in a + 1..counts.len() {
            let p = chi_square_homogeneity(&counts[a], &counts[b]).p_value;
            min_p = min_p.min(p);
            if p <= CHI_P {
                bad += 1;
            }
        }
    }
    let pairs = counts.len() * (counts.len() - 1) / 2;
    let ok = bad == 0;
    report(
        "setup independence",
        ok,
        &format!("{bad}/{pairs} seed pairs distinguishable at p <= {CHI_P}, min p = {min_p:.4}"),
    );
    assert!(ok);
}

#[test]
fn laplace_correctness() {
    const DRAWS: usize = 1_000_000;
    const KS_MAX: f64 = 0.002;
    const TAIL_REPS: u64 = 100_000;
    let mut r = rng(11, "laplace");
    let mut xs: Vec<f64> = (0..DRAWS).map(|_| laplace_sample(1.0, &mut r)).collect();
    let ks = ks_statistic(&mut xs, |x| laplace_cdf(1.0, x));
    let mut ok = ks < KS_MAX;
    let mut tails = Vec::new();
    for (m, t) in [(1u64, 2.0f64), (10, 3.0), (100, 4.0)] {
        let lambda = 1.0;
        let thresh = lambda * ((m as f64).ln() + t);
        let mut r = StreamRng::new(12, StreamId::derive("tail", &[m]));
        let exceed = (0..TAIL_REPS)
            .filter(|_| (0..m).map(|_| laplace_sample(lambda, &mut r).abs()).fold(0.0, f64::max) > thresh)
            .count() as f64;
        let bound = (-t).exp();
        let sigma = (bound * (1.0 - bound) / TAIL_REPS as f64).sqrt();
        let freq = exceed / TAIL_REPS as f64;
        let hold = freq <= bound + 3.0 * sigma;
        ok &= hold;
        tails.push(format!(
            "(m={m},t={t}): {freq:.5} <= {bound:.5}+3σ {}",
            if hold { "ok" } else { "no" }
        ));
    }
    report(
        "laplace correctness",
        ok,
        &format!("KS = {ks:.5} (< {KS_MAX}); {}", tails.join("; ")),
    );
    assert!(ok);
}

#[test]
fn parameter_calculators() {
    // References computed independently at 40 significant digits.
    let mut ok = true;
    let mut misses = Vec::new();
    let mut check = |what: String, got: f64, want: f64| {
        if !rel_close(got, want) {
            ok = false;
            misses.push(format!("{what}: {got} vs {want}"));
        }
    };
    for (args, e, d) in [
        ((0.1, 1e-6, 100, 1e-5), 6.7985259121880816789, 0.00010999999999999999629),
        (
            (0.01, 0.0, 1_000_000, 1e-3),
            237.16922188849839351,
            0.0010000000000000000208,
        ),
        ((0.5, 1e-8, 7, 0.25), 5.7027324540033492606, 0.25000007),
    ] {
        let (ge, gd) = advanced_composition(args.0, args.1, args.2, args.3).unwrap();
        check(format!("composition{args:?}.eps"), ge, e);
        check(format!("composition{args:?}.delta"), gd, d);
    }
    for (args, e, d) in [
        ((0.5, 1e-5, 10, 1000), 0.03, 4.1218181358140677596e-7),
        ((1.0, 1e-3, 1, 2), 3.0, 0.040171073846375336318),
        (
            (0.05, 1e-6, 64, 100_000),
            0.00019200000000000001066,
            2.560491567188939928e-9,
        ),
    ] {
        let (ge, gd) = subsampling_amplification(args.0, args.1, args.2, args.3).unwrap();
        check(format!("subsampling{args:?}.eps"), ge, e);
        check(format!("subsampling{args:?}.delta"), gd, d);
    }
    for (q, delta, l, k) in [
        (1000u64, 1e-3, 1_948_641u64, 553u64),
        (100, 1e-3, 616_215, 461),
        (1_000_000, 1e-3, 61_621_414, 829),
        (50, 1e-4, 670_849, 525),
    ] {
        let f = decider_constants_formula(q, delta, 0.01, 24.0, 40.0);
        let params = ProblemParams::hamming(2.0, 1.0, q, delta).unwrap();
        let g = decider_constants(&params, &Constants::default());
        check(format!("decider L (Q={q})"), f.copies as f64, l as f64);
        check(format!("decider k (Q={q})"), f.k_sub as f64, k as f64);
        check(format!("decider L via params (Q={q})"), g.copies as f64, l as f64);
    }
    for (c, want) in [
        (1.5, 0.5694294940796555436),
        (2.0, 0.28571428571428571429),
        (3.0, 0.13110938712179984484),
        (4.0, 0.081803005008347245409),
        (10.0, 0.025316455696202531646),
    ] {
        check(format!("rho'({c})"), rho_prime(c), want);
    }
    let calc_ok = ok;
    let (lhs, rhs) = subsampling_requirement(0.01, 1_000_000, 1e-3);
    let ineq = lhs < rhs;
    report(
        "parameter calculators",
        calc_ok && ineq,
        &format!(
            "12-digit agreement {}{}; 6k/L = {lhs:.6e} {} eps' = {rhs:.6e} at Q=1e6, delta=1e-3",
            if calc_ok { "ok" } else { "broken: " },
            misses.join(", "),
            if ineq { "<" } else { ">=" },
        ),
    );
    assert!(calc_ok, "{misses:?}");
    assert!(ineq, "6k/L = {lhs} is not below eps' = {rhs}");
}

fn scaled_decider_consts() -> Constants {
    Constants {
        decider_l: Some(64),
        decider_ksub: Some(64),
        ..Constants::default()
    }
}

#[test]
fn robust_decider_accuracy() {
    const GAMES: u64 = 1000;
    const MAX_RATE: f64 = 0.05;
    let t = Instant::now();
    let params = ProblemParams::hamming(2.0, 4.0, 100, 1e-3).unwrap();
    let consts = scaled_decider_consts();
    let transcripts = run_games(GAMES, 6, |g, seed| {
        let (ds, _) = synth::planted_instance(256, 32, params.r, &mut rng(seed, "data"));
        let dec = RobustDecider::build(ds, params, seed ^ 0x5eed, &consts)?;
        Ok((
            Box::new(dec) as Box<dyn Searcher>,
            Box::new(ReplayWorst::new(g)) as _,
            GameConfig {
                params,
                seed,
                schedule: UpdateSchedule::new(),
            },
        ))
    })
    .unwrap();
    let fr = failure_rate(&transcripts);
    let errors = transcripts.iter().filter(|t| t.error.is_some()).count();
    let secs = t.elapsed().as_secs_f64();
    let ok = fr.ci_high <= MAX_RATE && secs < 600.0;
    report(
        "robust decider accuracy",
        ok,
        &format!(
            "{}/{} games lost (rate {:.4}, 95% CI [{:.4}, {:.4}]), {errors} errors; {secs:.1}s",
            fr.failures, fr.games, fr.rate, fr.ci_low, fr.ci_high
        ),
    );
    assert!(ok);
}

#[test]
fn bucketing_end_to_end() {
    const INSTANCES: u64 = 100;
    const QUERIES: u64 = 10;
    const MAX_MISS: f64 = 0.05;
    let params = ProblemParams::hamming(2.0, 4.0, QUERIES, 1e-3).unwrap();
    let consts = scaled_decider_consts();
    let per: Vec<(u64, u64, u64)> = (0..INSTANCES)
        .into_par_iter()
        .map(|i| {
            let mut r = rng(i, "bucketing-data");
            let (ds, q0) = synth::planted_instance(1024, 32, params.r, &mut r);
            let mut idx = BucketedIndex::build(ds.clone(), params, 500 + i, &consts).unwrap();
            let ids = ds.ids();
            let (mut far, mut nonempty, mut missed) = (0, 0, 0);
            for j in 0..QUERIES {
                let q = if j == 0 {
                    q0.clone()
                } else {
                    let p = ds.get(ids[r.index(ids.len())]).unwrap().as_bits().unwrap();
                    Point::Bits(synth::at_distance(p, 1 + r.index(params.r as usize), &mut r))
                };
                let mut qr = StreamRng::new(i, StreamId::derive("query", &[j]));
                let ans = idx.query_budgeted(&q, &mut qr, &mut WorkBudget::unlimited()).unwrap();
                match ans {
                    Some(id) if ds.dist(id, &q) > params.cr() => far += 1,
                    None if !ball(&ds, &q, params.r).unwrap().is_empty() => missed += 1,
                    _ => {}
                }
                if !ball(&ds, &q, params.r).unwrap().is_empty() {
                    nonempty += 1;
                }
            }
            (far, nonempty, missed)
        })
        .collect();
    let far: u64 = per.iter().map(|x| x.0).sum();
    let nonempty: u64 = per.iter().map(|x| x.1).sum();
    let missed: u64 = per.iter().map(|x| x.2).sum();
    let rate = missed as f64 / nonempty as f64;
    let ok = far == 0 && rate <= MAX_MISS;
    report(
        "bucketing end to end",
        ok,
        &format!("{far} answers beyond cr; bottom on {missed}/{nonempty} queries with a nonempty r-ball ({rate:.4})"),
    );
    assert_eq!(far, 0, "answers beyond cr");
    assert!(rate <= MAX_MISS);
}

#[test]
fn telescoping_property() {
    const INSTANCES: u64 = 1000;
    let mut violations = 0;
    let mut checked = 0;
    for i in 0..INSTANCES {
        let mut r = rng(i, "telescoping");
        let n = 20 + r.index(200);
        let d = 16 + r.index(48);
        let radius = 1.0 + r.index(4) as f64;
        let c = 1.5 + 4.0 * r.next_f64();
        let (ds, q) = synth::planted_instance(n, d, radius, &mut r);
        for k in [2usize, 3, 4] {
            checked += 1;
            let w = telescoping_witness(&ds, &q, radius, c, k).unwrap();
            // independent recount of the witness condition
            let radii: Vec<f64> = (0..=k).map(|j| radius * c.powf(j as f64 / k as f64)).collect();
            let count = |x: f64| {
                ds.iter()
                    .filter(|(id, _)| ds.dist(*id, &q) <= x * (1.0 + 1e-12))
                    .count() as f64
            };
            let holds = (0..k).any(|j| count(radii[j + 1]) <= (n as f64).powf(1.0 / k as f64) * count(radii[j]));
            if w.is_none() || !holds {
                violations += 1;
            }
        }
    }
    let ok = violations == 0;
    report(
        "telescoping property",
        ok,
        &format!("{violations} violations over {checked} (instance, k) cases"),
    );
    assert!(ok);
}

#[test]
fn annuli_detection() {
    const TRIALS: u64 = 1000;
    const TRUTH_INSTANCES: u64 = 10_000;
    const TRUTH_RUNS: u64 = 10;
    const MIN_AGREE: f64 = 0.99;
    let consts = Constants {
        annuli_p_star: 0.9,
        annuli_eta: 0.05,
        annuli_s: Some(64),
        annuli_pool: Some(400),
        ..Constants::default()
    };
    let eta = consts.annuli_eta;
    let params = ProblemParams::hamming(4.0, 1.0, TRIALS, 1e-3).unwrap();
    let (ds, q) = synth::planted_ball(128, 16, 2.0, params.cr(), 3, &mut rng(9, "annuli-data"));
    let mut idx = AnnuliIndex::build(ds.clone(), params, 2, 77, &consts).unwrap();
    let tau = idx.threshold();
    let truth: Vec<f64> = (1..=idx.k())
        .map(|i| {
            let done: u64 = (0..TRUTH_INSTANCES)
                .into_par_iter()
                .map(|s| {
                    let fi = idx
                        .fresh_instance(i, StreamId::derive("truth", &[i as u64, s]).0)
                        .unwrap();
                    (0..TRUTH_RUNS)
                        .filter(|&t| {
                            let mut r = StreamRng::new(s, StreamId::derive("truth-run", &[i as u64, t]));
                            idx.finishes(i, &fi, &q, &mut r).unwrap()
                        })
                        .count() as u64
                })
                .sum();
            done as f64 / (TRUTH_INSTANCES * TRUTH_RUNS) as f64
        })
        .collect();
    let (mut agree, mut within, mut far) = (0u64, 0u64, 0u64);
    for t in 0..TRIALS {
        let mut r = StreamRng::new(5, StreamId::derive("query", &[t]));
        let (flags, ans) = idx.query_detailed(&q, &mut r, &mut WorkBudget::unlimited()).unwrap();
        let ok = truth
            .iter()
            .zip(&flags)
            .all(|(&p, &f)| (p - tau).abs() <= eta || f == (p >= tau));
        agree += ok as u64;
        if let Answer::Point(id) = ans {
            if ds.dist(id, &q) > params.cr() {
                far += 1;
            }
        }
        let mut r = StreamRng::new(5, StreamId::derive("query", &[t]));
        let est = idx.estimate(&q, &mut r, &mut WorkBudget::unlimited()).unwrap();
        within += truth.iter().zip(&est).all(|(p, e)| (p - e).abs() <= eta) as u64;
    }
    let rate = agree as f64 / TRIALS as f64;
    let ok = rate >= MIN_AGREE && far == 0;
    report(
        "annuli detection",
        ok,
        &format!(
            "truth p = {truth:.4?}, tau = {tau}; detection agrees on {agree}/{TRIALS}; \
             |p_hat - p|_inf <= eta on {within}/{TRIALS} (informational); {far} answers beyond cr"
        ),
    );
    assert_eq!(far, 0);
    assert!(rate >= MIN_AGREE);
}

#[test]
fn forall_exhaustive() {
    const BUILDS: u64 = 100;
    const MIN_PERFECT: usize = 99;
    let t = Instant::now();
    let params = ProblemParams::hamming(2.0, 1.0, 100, 1e-3).unwrap();
    let consts = Constants::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for d in [6usize, 8] {
        let perfect = (0..BUILDS)
            .into_par_iter()
            .filter(|&b| {
                let seed = StreamId::derive("forall-build", &[d as u64, b]).0;
                cli::experiments::forall_wrong_queries(32, d, params, seed, &consts).unwrap() == 0
            })
            .count();
        ok &= perfect >= MIN_PERFECT;
        parts.push(format!(
            "d={d}: {perfect}/{BUILDS} builds perfect on all {} queries",
            1u64 << d
        ));
    }
    let secs = t.elapsed().as_secs_f64();
    ok &= secs < 300.0;
    report("for-all exhaustive", ok, &format!("{}; {secs:.1}s", parts.join(", ")));
    assert!(ok);
}

fn lp(p: f64, a: &[f64], b: &[f64]) -> f64 {
    if p.is_infinite() {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    } else {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

#[test]
fn covering_soundness() {
    const SNAPS: u64 = 10_000;
    let mut violations = 0;
    let mut bound_ok = true;
    let mut r = rng(3, "covering");
    let setups = [
        (1.0, 0.3, 1.0, 4usize),
        (2.0, 0.5, 2.0, 6),
        (1.5, 0.2, 3.0, 3),
        (1.0, 0.05, 2.0, 2),
    ];
    for (i, s) in (0..SNAPS).zip(setups.iter().cycle()) {
        let &(cb, delta, p, d) = s;
        let g = GridCovering::new(cb, delta, p, d, 1e300).unwrap();
        let q: Vec<f64> = (0..d).map(|_| cb * (2.0 * r.next_f64() - 1.0)).collect();
        let s = g.snap(&q).unwrap();
        if lp(p, &q, &s) > delta * (1.0 + 1e-12) {
            violations += 1;
        }
        if i < setups.len() as u64 {
            let direct = ((2.0 * cb * (d as f64).powf(1.0 / p) / delta).powi(d as i32)).ln();
            let b = grid_count_log_bound(cb, d, p, delta);
            bound_ok &= ((b - direct) / direct).abs() < 1e-12 && g.log_count() <= b + 1e-12;
        }
    }
    let ok = violations == 0 && bound_ok;
    report(
        "covering soundness",
        ok,
        &format!(
            "{violations} of {SNAPS} snaps farther than delta; log-space grid bound {}",
            if bound_ok { "matches direct count" } else { "mismatch" }
        ),
    );
    assert!(ok);
}

#[test]
fn adversary_demonstration() {
    const GAMES: u64 = 100;
    let params = ProblemParams::hamming(2.0, 2.0, 1000, 1e-3).unwrap();
    let consts = Constants::default();
    let rate = |name: &'static str| {
        let ts = run_games(GAMES, 12, |g, seed| {
            let ds = synth::random_dataset(256, 32, &mut rng(seed, "data"));
            let s = cli::make_searcher(name, ds, params, seed ^ g, &consts, 2)?;
            Ok((
                s,
                Box::new(BucketProber::new()) as _,
                GameConfig {
                    params,
                    seed,
                    schedule: UpdateSchedule::new(),
                },
            ))
        })
        .unwrap();
        failure_rate(&ts)
    };
    let classic = rate("classic-single");
    let fair = rate("fair");
    let ok = classic.rate >= 0.5 && fair.rate <= 0.05;
    report(
        "adversary demonstration",
        ok,
        &format!(
            "bucket-prober wins {}/{} vs single-table classic, {}/{} vs fair sampler",
            classic.failures, classic.games, fair.failures, fair.games
        ),
    );
    assert!(ok);
}

fn configs() -> Vec<String> {
    vec![
        r#"kind = "game"
seed = 1
[problem]
r = 2
queries = 30
[data]
source = "planted"
n = 64
dim = 16
[game]
searcher = "fair"
adversary = "replay-worst"
games = 6
insert_every = 4
delete_every = 5
"#
        .into(),
        r#"kind = "fairness"
seed = 2
[data]
n = 60
dim = 16
[fairness]
instances = 3
trials = 500
"#
        .into(),
        r#"kind = "beta-curve"
[beta]
c_min = 1.5
c_max = 6
step = 0.25
"#
        .into(),
        r#"kind = "forall-exhaustive"
[problem]
r = 1
[forall]
dims = [6]
n = 16
builds = 3
"#
        .into(),
        r#"kind = "decider-accuracy"
seed = 4
[problem]
r = 4
queries = 20
[data]
source = "planted"
n = 64
dim = 32
[decider]
games = 5
[constants]
decider_l = 16
decider_ksub = 16
"#
        .into(),
    ]
}

#[test]
fn determinism() {
    let mut ok = true;
    let mut files = 0;
    for text in configs() {
        let cfg = ExperimentConfig::parse(&text).unwrap();
        let a = cli::run_experiment(&cfg).unwrap();
        let b = cli::run_experiment(&cfg).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            files += 1;
            ok &= x.name == y.name && x.bytes == y.bytes;
        }
    }
    // and through the binary, end to end
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("game.toml");
    std::fs::write(&cfg_path, &configs()[0]).unwrap();
    let run = |out: &str| {
        let st = std::process::Command::new(env!("CARGO_BIN_EXE_robann"))
            .args(["run", cfg_path.to_str().unwrap(), "--out"])
            .arg(dir.path().join(out))
            .output()
            .unwrap();
        assert!(st.status.success());
    };
    run("a");
    run("b");
    for f in ["games.csv", "transcripts.jsonl", "summary.json"] {
        files += 1;
        ok &= std::fs::read(dir.path().join("a").join(f)).unwrap()
            == std::fs::read(dir.path().join("b").join(f)).unwrap();
    }
    report(
        "determinism",
        ok,
        &format!("{files} output files compared byte for byte"),
    );
    assert!(ok);
}
