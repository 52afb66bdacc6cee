use std::io::Read;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use qfc_core::photonstats::{run_experiment, DetectorModel, ExperimentLayout, LayoutKind, PairSourceModel};
use qfc_core::timetag::{
    count_coincidences, cross_correlation, heralded_g2, read_events, read_stream, write_events, write_stream,
    EventSet, EventStream, TagError, HEADER_LEN, RECORD_LEN,
};

fn brute_force(a: &[u64], b: &[u64], window: u64, delay: i64) -> u64 {
    let mut n = 0;
    for &x in a {
        for &y in b {
            if 2 * (y as i128 - x as i128 - delay as i128).abs() <= window as i128 {
                n += 1;
            }
        }
    }
    n
}

fn sorted(max_len: usize, span: u64) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(0..span, 0..max_len).prop_map(|mut v| {
        v.sort_unstable();
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn streaming_counter_matches_brute_force(
        a in sorted(2000, 1_000_000),
        b in sorted(2000, 1_000_000),
        window in 0u64..5000,
        delay in -10_000i64..10_000,
    ) {
        prop_assert_eq!(count_coincidences(&a, &b, window, delay), brute_force(&a, &b, window, delay));
    }

    #[test]
    fn histogram_bins_match_counter(
        a in sorted(500, 200_000),
        b in sorted(500, 200_000),
        window in 1u64..3000,
        max_delay in 0u64..20_000,
    ) {
        prop_assume!(!a.is_empty() && !b.is_empty());
        let sa = EventStream::new(0, a.clone(), 200_000).unwrap();
        let sb = EventStream::new(1, b.clone(), 200_000).unwrap();
        let h = cross_correlation(&sa, &sb, window, max_delay).unwrap();
        prop_assert_eq!(h.delays_ps.len() % 2, 1);
        for (d, c) in h.delays_ps.iter().zip(&h.raw_counts) {
            prop_assert_eq!(*c, brute_force(&a, &b, window, *d));
        }
    }

    #[test]
    fn heralded_symmetric_in_signal_arms(
        h in sorted(400, 100_000),
        s1 in sorted(400, 100_000),
        s2 in sorted(400, 100_000),
        window in 1u64..3000,
    ) {
        prop_assume!(!h.is_empty());
        let d = 100_000;
        let h = EventStream::new(0, h, d).unwrap();
        let a = EventStream::new(1, s1, d).unwrap();
        let b = EventStream::new(2, s2, d).unwrap();
        let x = heralded_g2(&h, &a, &b, window, 0).unwrap()[0];
        let y = heralded_g2(&h, &b, &a, window, 0).unwrap()[0];
        prop_assert_eq!(x.triples, y.triples);
        prop_assert_eq!(x.flagged, y.flagged);
        prop_assert!(x.g2 == y.g2 || (x.g2.is_nan() && y.g2.is_nan()));
    }

    #[test]
    fn decreasing_timestamps_rejected(
        ts in sorted(200, 1_000_000),
        pick in any::<prop::sample::Index>(),
    ) {
        let mut ts = ts;
        ts.dedup();
        prop_assume!(ts.len() >= 2);
        let stream = EventStream::new(0, ts.clone(), 1_000_000).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.qtag");
        write_stream(&stream, &path).unwrap();
        prop_assert_eq!(read_stream(&path).unwrap(), stream);

        // Overwrite record i with a tick below its predecessor.
        let i = 1 + pick.index(ts.len() - 1);
        let mut bytes = std::fs::read(&path).unwrap();
        let at = HEADER_LEN + i * RECORD_LEN + 1;
        let smaller = ts[i - 1] - 1.min(ts[i - 1]);
        prop_assume!(smaller < ts[i - 1]);
        bytes[at..at + 8].copy_from_slice(&smaller.to_le_bytes());
        std::fs::write(&path, &bytes).unwrap();
        let err = read_stream(&path);
        prop_assert!(matches!(err, Err(TagError::Unsorted { index }) if index == i), "{:?}", err);
    }
}

#[test]
fn ten_million_event_roundtrip() {
    let mut rng = ChaCha8Rng::seed_from_u64(10_000_000);
    let duration = 1u64 << 50;
    let mut ts: Vec<u64> = (0..10_000_000).map(|_| rng.random_range(0..duration)).collect();
    ts.sort_unstable();
    let stream = EventStream::new(0, ts, duration).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.qtag");
    write_stream(&stream, &path).unwrap();
    let mut original = Vec::new();
    std::fs::File::open(&path).unwrap().read_to_end(&mut original).unwrap();
    assert_eq!(original.len(), HEADER_LEN + 10_000_000 * RECORD_LEN);

    let back = read_stream(&path).unwrap();
    let mut reencoded = Vec::new();
    write_events(&EventSet::new(1, duration, vec![back.clone()]).unwrap(), &mut reencoded).unwrap();
    assert_eq!(Sha256::digest(&original), Sha256::digest(&reencoded));
    assert_eq!(back, stream);
}

#[test]
fn multichannel_roundtrip_through_reader() {
    let set = EventSet::new(
        2,
        1000,
        vec![
            EventStream::new(0, vec![0, 2, 998], 1000).unwrap(),
            EventStream::new(1, vec![2, 4], 1000).unwrap(),
        ],
    )
    .unwrap();
    let mut bytes = Vec::new();
    write_events(&set, &mut bytes).unwrap();
    assert_eq!(read_events(bytes.as_slice()).unwrap(), set);
}

fn poisson(rng: &mut ChaCha8Rng, rate_cps: f64, duration_ps: u64) -> Vec<u64> {
    let mut t = 0f64;
    let mut out = Vec::new();
    loop {
        t += -(1.0 - rng.random::<f64>()).ln() / rate_cps * 1e12;
        if t >= duration_ps as f64 {
            return out;
        }
        out.push(t as u64);
    }
}

#[test]
fn independent_streams_accidentals() {
    // 10 kcps × 10 kcps × 1500 ps × 10 s = 1.5 expected accidentals.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let d = 10_000_000_000_000;
    let a = poisson(&mut rng, 1e4, d);
    let b = poisson(&mut rng, 1e4, d);
    let n = count_coincidences(&a, &b, 1500, 0);
    let expected = a.len() as f64 * b.len() as f64 * 1500.0 / d as f64;
    assert!((n as f64 - expected).abs() <= 3.0 * expected.sqrt() + 1.0, "{n} vs {expected}");
    assert_eq!(
        count_coincidences(&a[..10_000], &b, 1500, 0),
        brute_force(&a[..10_000], &b, 1500, 0)
    );
}

#[test]
fn perfectly_paired_streams() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let d = 10_000_000_000_000;
    let t = poisson(&mut rng, 1e4, d);
    let a = EventStream::new(0, t.clone(), d).unwrap();
    let b = EventStream::new(1, t, d).unwrap();
    let g = cross_correlation(&a, &b, 1500, 0).unwrap().g2_at_zero();
    let expected = 1.0 / (a.rate_cps() * 1500e-12);
    // accidentals add ≈ 1 on top of the correlated peak
    assert!((g / expected - 1.0).abs() < 1e-3, "{g} vs {expected}");
    assert!((g / 66_667.0 - 1.0).abs() < 0.01, "{g}");
}

#[test]
fn normalization_invariant_under_concatenation() {
    let layout = ExperimentLayout {
        kind: LayoutKind::Pair,
        source: PairSourceModel::new(0.05, 1500, 2e-3).unwrap(),
        signal_loss_db: 3.0,
        idler_loss_db: 3.0,
        splitter_ratio: 0.5,
        qfc: None,
        detectors: vec![DetectorModel::ideal(); 2],
    };
    let single = run_experiment(&layout, 1).unwrap();
    let d = single.events.duration_ps();
    let g_of = |a: &EventStream, b: &EventStream| {
        let h = cross_correlation(a, b, 1500, 15_000).unwrap();
        (h.g2.clone(), h.raw_counts.clone())
    };
    let (g1, raw1) = g_of(single.stream("signal").unwrap(), single.stream("idler").unwrap());

    let k = 4u64;
    let (mut sig, mut idl) = (Vec::new(), Vec::new());
    for j in 0..k {
        let run = run_experiment(&layout, 100 + j).unwrap();
        sig.extend(run.stream("signal").unwrap().timestamps().iter().map(|t| t + j * d));
        idl.extend(run.stream("idler").unwrap().timestamps().iter().map(|t| t + j * d));
    }
    let sig = EventStream::new(0, sig, k * d).unwrap();
    let idl = EventStream::new(1, idl, k * d).unwrap();
    let (gk, rawk) = g_of(&sig, &idl);
    for i in 0..g1.len() {
        let s1 = g1[i] / (raw1[i].max(1) as f64).sqrt();
        let sk = gk[i] / (rawk[i].max(1) as f64).sqrt();
        assert!((g1[i] - gk[i]).abs() <= 3.0 * (s1 * s1 + sk * sk).sqrt(), "bin {i}: {} vs {}", g1[i], gk[i]);
    }
}
