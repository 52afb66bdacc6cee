use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qfc_core::photonstats::{
    apply_beamsplitter, apply_loss, run_experiment, simulate_pair_source, DetectorModel, ExperimentLayout,
    LayoutKind, PairSourceModel, PairStatistics, QfcStage,
};
use qfc_core::timetag::{cross_correlation, heralded_g2};

fn layout(kind: LayoutKind, mu: f64, duration_s: f64, detectors: DetectorModel) -> ExperimentLayout {
    ExperimentLayout {
        kind,
        source: PairSourceModel::new(mu, 1500, duration_s).unwrap(),
        signal_loss_db: 0.0,
        idler_loss_db: 0.0,
        splitter_ratio: 0.5,
        qfc: Some(QfcStage {
            conversion_efficiency: 0.72,
            noise_rate_cps: 5e6,
        }),
        detectors: vec![detectors; kind.channel_names().len()],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn identical_seed_identical_streams(seed in any::<u64>(), qfc in any::<bool>()) {
        let kind = if qfc { LayoutKind::HspsQfc } else { LayoutKind::Hsps };
        let mut l = layout(kind, 0.05, 2e-4, DetectorModel::snspd());
        l.signal_loss_db = 2.0;
        prop_assert_eq!(run_experiment(&l, seed).unwrap(), run_experiment(&l, seed).unwrap());
    }

    #[test]
    fn lossless_splitter_conserves_lossy_elements_shrink(seed in any::<u64>(), t in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let src = PairSourceModel::new(0.2, 1500, 1e-5).unwrap();
        let pairs = simulate_pair_source(&src, &mut rng).unwrap();
        let (a, b) = apply_beamsplitter(&pairs, t, &mut rng).unwrap();
        prop_assert_eq!(a.len() + b.len(), pairs.len());
        let mut merged = [a, b].concat();
        merged.sort_unstable();
        prop_assert_eq!(&merged, &pairs);

        let kept = apply_loss(&pairs, t, &mut rng).unwrap();
        prop_assert!(kept.len() <= pairs.len());
        let mut it = pairs.iter();
        prop_assert!(kept.iter().all(|k| it.any(|p| p == k)), "not a subsequence");
    }
}

/// g²_si(0) with σ from the Poisson error of the coincidence count.
fn pair_g2(mu: f64, modes: u64, statistics: PairStatistics, seed: u64) -> (f64, f64) {
    let mut l = layout(LayoutKind::Pair, mu, modes as f64 * 1.5e-9, DetectorModel::ideal());
    l.source = l.source.with_statistics(statistics);
    let run = run_experiment(&l, seed).unwrap();
    let h = cross_correlation(run.stream("signal").unwrap(), run.stream("idler").unwrap(), 1500, 0).unwrap();
    let g = h.g2_at_zero();
    (g, g / (h.raw_counts[h.center_index()] as f64).sqrt())
}

#[test]
fn thermal_source_identity() {
    // Window equal to the mode length, pairs uniform within a mode:
    // same-mode distinct pairs coincide with probability 3/4, neighbouring
    // modes with 1/8 each, so g²(0) = 1/μ + (3/4)·E[n(n−1)]/μ² + 1/4.
    for (i, mu) in [0.01, 0.05, 0.2].into_iter().enumerate() {
        let (g, s) = pair_g2(mu, 1_000_000, PairStatistics::Thermal, 40 + i as u64);
        let expected = 1.0 / mu + 1.75;
        assert!((g - expected).abs() <= 3.0 * s, "thermal μ={mu}: {g} ± {s} vs {expected}");
    }
}

#[test]
fn poisson_source_identity() {
    for (i, mu) in [0.01, 0.05, 0.2].into_iter().enumerate() {
        let (g, s) = pair_g2(mu, 1_000_000, PairStatistics::Poisson, 50 + i as u64);
        let expected = 1.0 + 1.0 / mu;
        assert!((g - expected).abs() <= 3.0 * s, "poisson μ={mu}: {g} ± {s} vs {expected}");
    }
}

fn heralded_zero(l: &ExperimentLayout, seed: u64) -> (f64, f64) {
    let run = run_experiment(l, seed).unwrap();
    let p = heralded_g2(run.stream("idler").unwrap(), run.stream("s1").unwrap(), run.stream("s2").unwrap(), 1500, 0)
        .unwrap()[0];
    assert!(!p.flagged);
    (p.g2, p.g2 / (p.triples.max(1) as f64).sqrt())
}

#[test]
fn heralded_antibunching_with_ideal_detectors() {
    for mu in [0.01, 0.05] {
        let l = layout(LayoutKind::Hsps, mu, 0.015, DetectorModel::ideal());
        let (g, s) = heralded_zero(&l, 3);
        assert!(g + 3.0 * s < 0.5, "μ={mu}: {g} ± {s}");
    }
}

#[test]
fn converter_noise_raises_heralded_g2() {
    let mut l = layout(LayoutKind::Hsps, 0.05, 0.1, DetectorModel::snspd());
    l.qfc = Some(QfcStage {
        conversion_efficiency: 0.72,
        noise_rate_cps: 1.4e7,
    });
    l.idler_loss_db = 10.0;
    l.signal_loss_db = 3.0;
    let (g0, s0) = heralded_zero(&l, 8);
    let (g1, s1) = heralded_zero(&l.with_kind(LayoutKind::HspsQfc), 8);
    assert!(g1 - g0 > 3.0 * (s0 * s0 + s1 * s1).sqrt(), "{g0} ± {s0} → {g1} ± {s1}");
}
