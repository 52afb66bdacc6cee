use proptest::prelude::*;

use qfc_core::conversion::ConversionModel;
use qfc_core::noise::NoiseModel;

fn model() -> impl Strategy<Value = NoiseModel> {
    (0.0f64..5000.0, 1.0f64..50_000.0)
        .prop_map(|(a, k)| NoiseModel::new(a, k, ConversionModel::converter_chip()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn analytic_slope_matches_finite_difference(m in model(), p in 0.010f64..0.400) {
        let h = 1e-4;
        let ln_n = |lnp: f64| m.ncr_on_chip(lnp.exp()).ln();
        let numeric = (ln_n(p.ln() + h) - ln_n(p.ln() - h)) / (2.0 * h);
        let analytic = m.loglog_slope(p).unwrap();
        prop_assert!((numeric - analytic).abs() < 1e-3, "{numeric} vs {analytic}");
    }

    #[test]
    fn spdc_fraction_monotone_below_first_maximum(a in 1.0f64..5000.0, k in 1.0f64..50_000.0) {
        let conv = ConversionModel::converter_chip();
        let m = NoiseModel::new(a, k, conv).unwrap();
        let p_star = conv.optimal_pump();
        let f: Vec<f64> = (1..=200).map(|i| m.spdc_fraction(p_star * i as f64 / 200.0).unwrap()).collect();
        prop_assert!(f.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn rate_is_non_negative_and_continuous(m in model(), p in 0.0f64..1.0) {
        let n = m.ncr_on_chip(p);
        prop_assert!(n >= 0.0);
        let n2 = m.ncr_on_chip(p + 1e-9);
        prop_assert!((n2 - n).abs() < 1e-3);
    }
}

#[test]
fn small_signal_is_cubic() {
    let m = NoiseModel::calibrate_spdc_only(ConversionModel::converter_chip(), 0.24, 900.0).unwrap();
    let ratio = m.ncr_on_chip(2e-4) / m.ncr_on_chip(1e-4);
    assert!((ratio / 8.0 - 1.0).abs() < 1e-3, "{ratio}");
}
