use robann::constants::Constants;
use robann::error::Error;
use robann::fair::FairIndex;
use robann::harness::{fairness_test, Adversary};
use robann::harness::{
    make_adversary, run_game, BottomSearcher, BucketProber, GameConfig, ObliviousRandom, OracleSearcher, UpdateOp,
    UpdateSchedule, View,
};
use robann::metric::{Dataset, Point, PointId};
use robann::params::ProblemParams;
use robann::rng::{StreamId, StreamRng};
use robann::search::{Answer, Response, Searcher};
use robann::synth;

fn params(q: u64) -> ProblemParams {
    ProblemParams::hamming(2.0, 2.0, q, 1e-3).unwrap()
}

fn instance(seed: u64) -> (Dataset, Point) {
    synth::planted_instance(64, 16, 2.0, &mut StreamRng::new(seed, StreamId::derive("data", &[])))
}

fn cfg(q: u64, seed: u64) -> GameConfig {
    GameConfig {
        params: params(q),
        seed,
        schedule: UpdateSchedule::new(),
    }
}

#[test]
fn oracle_searcher_never_loses() {
    for s in 0..20 {
        let (ds, _) = instance(s);
        for name in ["oblivious-random", "repeat-perturb", "replay-worst", "bucket-prober"] {
            let mut o = OracleSearcher::new(ds.clone(), 2.0);
            let mut a = make_adversary(name, s).unwrap();
            let t = run_game(&mut o, a.as_mut(), &cfg(50, s)).unwrap();
            assert!(!t.adversary_won, "{name} beat the oracle");
            assert_eq!(t.rounds.len(), 50);
        }
    }
}

#[test]
fn bottom_searcher_loses_first_round() {
    let (ds, _) = instance(1);
    let mut b = BottomSearcher::new(ds);
    let t = run_game(&mut b, &mut ObliviousRandom::new(3), &cfg(50, 0)).unwrap();
    assert!(t.adversary_won);
    assert_eq!(t.rounds.len(), 1);
    assert_eq!(t.rounds[0].answer, Answer::Bottom);
}

/// Records, for every update, how many queries it had seen.
struct Recorder {
    inner: OracleSearcher,
    queries: u64,
    log: Vec<(u64, &'static str)>,
}

impl Searcher for Recorder {
    fn query(&mut self, q: &Point, rng: &mut StreamRng) -> robann::error::Result<Response> {
        self.queries += 1;
        self.inner.query(q, rng)
    }
    fn insert(&mut self, p: Point) -> robann::error::Result<PointId> {
        self.log.push((self.queries, "insert"));
        self.inner.insert(p)
    }
    fn delete(&mut self, id: PointId) -> robann::error::Result<()> {
        self.log.push((self.queries, "delete"));
        self.inner.delete(id)
    }
    fn dataset(&self) -> &Dataset {
        self.inner.dataset()
    }
}

#[test]
fn schedule_applies_updates_after_the_named_round() {
    let (ds, _) = instance(2);
    let mut c = cfg(10, 4);
    let extra = synth::random_bits(16, &mut StreamRng::new(9, StreamId::derive("x", &[])));
    c.schedule.push(2, UpdateOp::Insert(Point::Bits(extra)));
    c.schedule.push(5, UpdateOp::Delete(PointId(0)));
    c.schedule.push(5, UpdateOp::Delete(PointId(64)));
    let mut r = Recorder {
        inner: OracleSearcher::new(ds, 2.0),
        queries: 0,
        log: Vec::new(),
    };
    let t = run_game(&mut r, &mut ObliviousRandom::new(1), &c).unwrap();
    assert!(!t.adversary_won);
    assert_eq!(r.log, vec![(3, "insert"), (6, "delete"), (6, "delete")]);
    assert!(!r.dataset().contains(PointId(64)));
}

#[test]
fn transcripts_replay_bit_for_bit() {
    let params = params(40);
    let play = || {
        let (ds, _) = instance(5);
        let mut f = FairIndex::build(ds, params, 17, &Constants::default()).unwrap();
        let t = run_game(
            &mut f,
            make_adversary("repeat-perturb", 8).unwrap().as_mut(),
            &cfg(40, 23),
        )
        .unwrap();
        let mut buf = Vec::new();
        t.write_jsonl(&mut buf).unwrap();
        buf
    };
    let a = play();
    assert!(!a.is_empty());
    assert_eq!(a, play());
}

#[test]
fn adversaries_emit_valid_queries() {
    let (ds, _) = instance(6);
    let p = params(10);
    for name in robann::harness::adversary::STRATEGIES {
        let mut a = make_adversary(name, 1).unwrap();
        assert_eq!(a.name(), name);
        let q = a.next_query(&View {
            history: &[],
            dataset: &ds,
            params: &p,
        });
        assert_eq!(q.dim(), 16);
        ds.check(&q).unwrap();
    }
    assert!(make_adversary("nope", 0).is_none());
}

#[test]
fn oblivious_queries_have_a_near_neighbor() {
    let (ds, _) = instance(7);
    let p = params(10);
    let mut a = ObliviousRandom::new(2);
    for _ in 0..20 {
        let q = a.next_query(&View {
            history: &[],
            dataset: &ds,
            params: &p,
        });
        assert!(!robann::metric::ball(&ds, &q, 2.0).unwrap().is_empty());
    }
}

#[test]
fn bucket_prober_learns_a_sampled_bit() {
    use robann::lsh::{derive_params, AmplifiedLshIndex};
    use robann::params::RhoMode;
    use robann::search::ClassicSearcher;
    let ds = synth::random_dataset(256, 32, &mut StreamRng::new(3, StreamId::derive("data", &[])));
    let p = params(1000);
    let mut lp = derive_params(&p, 32, 256, 1.0, RhoMode::Measured, 5).unwrap();
    lp.l_tables = 1;
    let idx = AmplifiedLshIndex::build(ds, lp).unwrap();
    let coords: Vec<u32> = idx.tables().coords(0).to_vec();
    let mut s = ClassicSearcher::new(idx, p);
    let mut adv = BucketProber::new();
    let t = run_game(&mut s, &mut adv, &cfg(1000, 0)).unwrap();
    assert!(t.adversary_won);
    let learned = adv.learned();
    assert!(
        learned.iter().all(|&b| coords.contains(&(b as u32))),
        "{learned:?} not in {coords:?}"
    );
}

#[test]
fn fairness_test_modes() {
    let p = params(100);
    let (ds, q) = synth::planted_ball(50, 16, 2.0, 4.0, 3, &mut StreamRng::new(1, StreamId::derive("b", &[])));
    let mut o = OracleSearcher::new(ds.clone(), 2.0);

    // too few trials for the ball
    let e = fairness_test(&mut o, &ds, &q, 2.0, 29, 0).unwrap_err();
    assert!(matches!(e, Error::Underpowered(_)));

    // uniform searcher passes
    let rep = fairness_test(&mut o, &ds, &q, 2.0, 3000, 0).unwrap();
    assert!(rep.chi_square.unwrap().p_value > 1e-3);

    // an empty ball is skipped with a notice
    let (far_ds, fq) = synth::planted_ball(20, 16, 2.0, 4.0, 0, &mut StreamRng::new(2, StreamId::derive("b", &[])));
    let mut o2 = OracleSearcher::new(far_ds.clone(), 2.0);
    let rep = fairness_test(&mut o2, &far_ds, &fq, 2.0, 3000, 0).unwrap();
    assert!(rep.chi_square.is_none() && rep.notice.is_some());

    let mut f = FairIndex::build(ds.clone(), p, 3, &Constants::default()).unwrap();
    let fair = fairness_test(&mut f, &ds, &q, 2.0, 3000, 0).unwrap();
    assert!(fair.chi_square.unwrap().p_value > 1e-3);
    // the classic index returns the same neighbor every time
    let lp = robann::lsh::derive_params(&p, 16, 50, 1.0, robann::params::RhoMode::Measured, 3).unwrap();
    let mut c = robann::search::ClassicSearcher::new(robann::lsh::AmplifiedLshIndex::build(ds.clone(), lp).unwrap(), p);
    let biased = fairness_test(&mut c, &ds, &q, 2.0, 3000, 0).unwrap();
    assert!(biased.chi_square.unwrap().p_value < 1e-6);
}
