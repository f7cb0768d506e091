use moran_core::haldane::{
    expected_r_inf, expected_r_inf_direct, fixation_prob_direct, fixation_prob_exact,
    haldane_prediction, haldane_scan, selection_strength, write_haldane_csv,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn strictly_between_zero_and_one(n in 2usize..2000, sigma in 0.01f64..50.0, m in 1u32..6, alpha in 0.0f64..1.0) {
        let p = fixation_prob_exact(n, sigma, m, alpha).unwrap();
        prop_assert!(p > 0.0 && p < 1.0);
    }

    #[test]
    fn monotone_in_sigma_and_m(n in 2usize..500, sigma in 0.01f64..5.0, m in 1u32..5, alpha in 0.0f64..1.0) {
        let p = fixation_prob_exact(n, sigma, m, alpha).unwrap();
        prop_assert!(fixation_prob_exact(n, sigma * 1.1, m, alpha).unwrap() > p);
        prop_assert!(fixation_prob_exact(n, sigma, m + 1, alpha).unwrap() >= p);
    }

    #[test]
    fn recurrence_matches_term_by_term(n in 2usize..1000, sigma in 0.01f64..5.0, m in 1u32..5, alpha in 0.0f64..1.0) {
        let a = fixation_prob_exact(n, sigma, m, alpha).unwrap();
        let b = fixation_prob_direct(n, sigma, m, alpha).unwrap();
        prop_assert!(((a - b) / b).abs() <= 1e-12);
    }
}

#[test]
fn genic_case_matches_classical_formula() {
    for (n, sigma) in [(10, 0.5), (200, 0.1), (5000, 0.01)] {
        let s = selection_strength(n, sigma, 0.0);
        let q = 1.0 / (1.0 + s);
        let want = (1.0 - q) / (1.0 - q.powi(n as i32));
        let got = fixation_prob_exact(n, sigma, 1, 0.0).unwrap();
        assert!(((got - want) / want).abs() <= 1e-12, "N={n}");
    }
}

#[test]
fn ratio_to_haldane_tends_to_one() {
    let rows = haldane_scan(1.0, 2, 0.5, &[100, 1_000, 10_000, 100_000]).unwrap();
    let gaps: Vec<f64> = rows.iter().map(|r| (r.ratio - 1.0).abs()).collect();
    for w in gaps.windows(2) {
        assert!(w[1] < w[0], "{gaps:?}");
    }
    assert!(gaps[3] < 0.01, "{gaps:?}");
    assert!((rows[0].haldane_prediction - haldane_prediction(100, 1.0, 2, 0.5)).abs() < 1e-16);
}

#[test]
fn stationary_line_count_routes_agree() {
    for (n, m, alpha) in [(8, 1, 0.0), (40, 2, 0.5), (100, 3, 0.7)] {
        let a = expected_r_inf(n, 1.5, m, alpha).unwrap();
        let b = expected_r_inf_direct(n, 1.5, m, alpha).unwrap();
        assert!((a - b).abs() <= 1e-8 * a, "N={n}: {a} vs {b}");
    }
    assert!(expected_r_inf_direct(101, 1.0, 1, 0.5).is_err());
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(fixation_prob_exact(1, 1.0, 1, 0.5).is_err());
    assert!(fixation_prob_exact(10, 0.0, 1, 0.5).is_err());
    assert!(fixation_prob_exact(10, 1.0, 0, 0.5).is_err());
    assert!(fixation_prob_exact(10, 1.0, 1, f64::NAN).is_err());
}

#[test]
fn csv_layout() {
    let rows = haldane_scan(1.0, 1, 0.5, &[10, 20]).unwrap();
    let mut buf = Vec::new();
    write_haldane_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,p_fix,haldane_prediction,ratio"));
    assert!(lines.next().unwrap().starts_with("10,"));
    assert!(!text.contains('\r'));
}
