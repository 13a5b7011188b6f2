//! Statistical checks of the bit-sampling tables against closed forms.

use robann::lsh::{bit_sampling_probs, derive_params, AmplifiedLshIndex, LshTables};
use robann::metric::{Dataset, Metric, Point};
use robann::params::{ProblemParams, RhoMode};
use robann::rng::{StreamId, StreamRng};
use robann::synth;

fn rng(s: u64) -> StreamRng {
    StreamRng::new(s, StreamId::derive("lsh-test", &[]))
}

#[test]
fn collision_rate_matches_p_to_the_k() {
    let (d, k, trials) = (32usize, 4usize, 20_000u64);
    let mut r = rng(1);
    for dist in [2usize, 8, 16] {
        let p = 1.0 - dist as f64 / d as f64;
        let expect = p.powi(k as i32);
        let mut hits = 0u64;
        for t in 0..trials {
            let x = synth::random_bits(d, &mut r);
            let y = synth::at_distance(&x, dist, &mut r);
            let tables = LshTables::sample(d, k, 1, &mut StreamRng::new(t, StreamId::derive("tables", &[])));
            hits += u64::from(tables.key(0, &x) == tables.key(0, &y));
        }
        let got = hits as f64 / trials as f64;
        let sd = (expect * (1.0 - expect) / trials as f64).sqrt();
        assert!((got - expect).abs() < 5.0 * sd + 1e-9, "dist {dist}: {got} vs {expect}");
    }
}

#[test]
fn single_bit_probability() {
    let (p1, p2) = bit_sampling_probs(20, 2.0, 6.0).unwrap();
    assert_eq!(p1, 0.9);
    assert_eq!(p2, 0.7);
}

#[test]
fn planted_neighbor_is_usually_found() {
    let params = ProblemParams::hamming(2.0, 3.0, 100, 1e-3).unwrap();
    let mut found = 0;
    for s in 0..200 {
        let (ds, q) = synth::planted_instance(500, 64, 3.0, &mut rng(100 + s));
        let lp = derive_params(&params, 64, 500, 3.0, RhoMode::Measured, s).unwrap();
        let idx = AmplifiedLshIndex::build(ds, lp).unwrap();
        found += u32::from(idx.classic_query(&q, params.cr()).unwrap().is_some());
    }
    // three times the n^rho tables: miss probability well under 5%
    assert!(found >= 190, "found {found}/200");
}

#[test]
fn every_candidate_shares_a_bucket() {
    let mut r = rng(3);
    let ds = synth::random_dataset(300, 24, &mut r);
    let lp = derive_params(
        &ProblemParams::hamming(2.0, 2.0, 10, 1e-3).unwrap(),
        24,
        300,
        1.0,
        RhoMode::Measured,
        4,
    )
    .unwrap();
    let idx = AmplifiedLshIndex::build(ds.clone(), lp).unwrap();
    let q = synth::random_bits(24, &mut r);
    let t = idx.tables();
    for c in idx.candidates(&Point::Bits(q.clone())).unwrap() {
        let x = ds.get(c.id).unwrap().as_bits().unwrap();
        assert_eq!(c.collisions, t.collisions_between(x, &q));
        assert!(c.collisions >= 1);
    }
}

#[test]
fn blob_round_trip_after_updates() {
    let mut r = rng(4);
    let ds = synth::random_dataset(100, 40, &mut r);
    let lp = derive_params(
        &ProblemParams::hamming(2.0, 3.0, 10, 1e-3).unwrap(),
        40,
        100,
        1.0,
        RhoMode::Measured,
        9,
    )
    .unwrap();
    let mut idx = AmplifiedLshIndex::build(ds, lp).unwrap();
    for _ in 0..10 {
        idx.insert(Point::Bits(synth::random_bits(40, &mut r))).unwrap();
    }
    idx.delete(robann::metric::PointId(3)).unwrap();
    let bytes = idx.to_bytes();
    let back = AmplifiedLshIndex::from_bytes(&bytes).unwrap();
    assert_eq!(back.to_bytes(), bytes);
    for _ in 0..50 {
        let q = Point::Bits(synth::random_bits(40, &mut r));
        assert_eq!(
            idx.classic_query(&q, 6.0).unwrap(),
            back.classic_query(&q, 6.0).unwrap()
        );
    }
}

#[test]
fn real_points_are_refused() {
    let params = ProblemParams::new(Metric::Lp(2.0), 2.0, 1.0, 10, 1e-3).unwrap();
    assert!(derive_params(&params, 2, 1, 1.0, RhoMode::Measured, 0).is_err());
    let ds = Dataset::from_points(Metric::Lp(2.0), 2, vec![Point::real(vec![0.0, 1.0])]).unwrap();
    let hp = ProblemParams::hamming(2.0, 1.0, 10, 1e-3).unwrap();
    let lp = derive_params(&hp, 2, 1, 1.0, RhoMode::Measured, 0).unwrap();
    assert!(AmplifiedLshIndex::build(ds, lp).is_err());
}
