mod common;

use common::{draw, rng};
use moran_core::ctmc::{transient, Dist};
use moran_core::dualities::{
    check_conjugation, check_descendant_equality, check_factorial_duality, check_h_representation,
    check_siegmund_duality, check_ytilde_l_duality, h_f, h_moment, h_s,
};
use moran_core::generators::{build_q_r, build_t, StateLabel};
use moran_core::graphical::{extract_r_path, sample_event_log};
use moran_core::rng::run_replicates;
use moran_core::ModelParams;
use proptest::prelude::*;
use rand::seq::index::sample;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn finite_dualities_hold(seed in any::<u64>(), n in 2usize..16, t in 0.01f64..3.0) {
        let p = draw(&mut rng(seed), n);
        for r in [
            check_factorial_duality(&p, t, 1e-13).unwrap(),
            check_ytilde_l_duality(&p, t, 1e-13).unwrap(),
            check_siegmund_duality(&p, t, 1e-13).unwrap(),
            check_h_representation(&p, t, 1e-13).unwrap(),
        ] {
            prop_assert!(r.passes(1e-10), "{} residual {}", r.identity, r.max_abs_residual);
        }
    }

    #[test]
    fn conjugation_is_exact(seed in any::<u64>(), n in 2usize..10) {
        let p = draw(&mut rng(seed), n);
        prop_assert!(check_conjugation(&p).unwrap().max_abs_residual <= 1e-12);
    }
}

#[test]
fn residuals_vanish_at_time_zero() {
    let p = draw(&mut rng(1), 9);
    for r in [
        check_factorial_duality(&p, 0.0, 1e-12).unwrap(),
        check_ytilde_l_duality(&p, 0.0, 1e-12).unwrap(),
        check_siegmund_duality(&p, 0.0, 1e-12).unwrap(),
        check_descendant_equality(&p, 0.0, 1e-12).unwrap(),
    ] {
        assert_eq!(r.max_abs_residual, 0.0, "{}", r.identity);
    }
}

#[test]
fn residuals_follow_the_transient_tolerance() {
    let p = draw(&mut rng(2), 12);
    let loose = check_factorial_duality(&p, 1.5, 1e-6)
        .unwrap()
        .max_abs_residual;
    let tight = check_factorial_duality(&p, 1.5, 1e-12)
        .unwrap()
        .max_abs_residual;
    assert!(loose <= 2e-6 * 100.0, "{loose}");
    assert!(tight <= 2e-12 * 100.0, "{tight}");
    assert!(tight <= loose);
}

#[test]
fn descendant_equality_holds() {
    let p = ModelParams::ftw(6, 0.4, 0.3, [(1, 0.5), (2, 0.2)]).unwrap();
    let r = check_descendant_equality(&p, 1.2, 1e-13).unwrap();
    assert!(r.passes(1e-10), "{}", r.max_abs_residual);
}

#[test]
fn duality_functions_at_boundaries() {
    assert_eq!(h_f(3, StateLabel::Cemetery, 5), 0.0);
    assert_eq!(h_f(3, StateLabel::Count(0), 5), 1.0);
    assert!((h_f(3, StateLabel::Count(2), 5) - 0.3).abs() < 1e-15);
    assert_eq!(h_f(1, StateLabel::Count(2), 5), 0.0);
    assert_eq!(h_s(0, 0), 1.0);
    assert_eq!(h_s(3, 5), 0.0);
    assert_eq!(h_s(5, 3), 1.0);
    assert_eq!(h_s(8, 9), 0.0);
    assert!((h_moment(0.5, StateLabel::Count(3)) - 0.125).abs() < 1e-15);
    assert_eq!(h_moment(0.5, StateLabel::Cemetery), 0.0);
}

/// Law of the largest kASG site (1-based, 0 if empty, Delta if killed)
/// against `p_r T`.
#[test]
fn max_line_law_is_p_r_times_t() {
    let n = 8;
    let j = 3;
    let r = 0.7;
    let logs = 100_000;
    let p = ModelParams::ftw(n, 0.6, 0.4, [(1, 0.5), (2, 0.4)]).unwrap();
    let chain = build_q_r(&p).unwrap();
    let law = transient(
        &chain,
        &Dist::delta_at(&chain, StateLabel::Count(j)).unwrap(),
        r,
        1e-13,
    )
    .unwrap();
    let label_at = |i: usize| {
        if i == n + 1 {
            StateLabel::Cemetery
        } else {
            StateLabel::Count(i as u32)
        }
    };
    let p_r: Vec<f64> = (0..n + 2).map(|i| law.prob(label_at(i))).collect();
    let t = build_t(n);
    let q_r: Vec<f64> = (0..n + 2)
        .map(|k| (0..n + 2).map(|i| p_r[i] * t[(i, k)]).sum())
        .collect();

    let maxima = run_replicates(2024, logs, |_, rng| {
        let sites: Vec<u32> = sample(rng, n, j as usize)
            .into_iter()
            .map(|s| s as u32)
            .collect();
        let log = sample_event_log(&p, r, rng).unwrap();
        let last = extract_r_path(&log, &sites).unwrap().last;
        if last.is_killed() {
            n + 1
        } else {
            last.sites().iter().max().map_or(0, |&s| s as usize + 1)
        }
    });
    let mut freq = vec![0.0; n + 2];
    for m in maxima {
        freq[m] += 1.0 / logs as f64;
    }
    let tv: f64 = 0.5
        * freq
            .iter()
            .zip(&q_r)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>();
    assert!(tv <= 0.02, "TV {tv}");
}
