mod common;

use common::{draw, draw_diffusion, rng};
use moran_core::params::{effective_branching_rate, parse_number};
use moran_core::{DiffusionParams, Error, ModelParams};
use proptest::prelude::*;

proptest! {
    #[test]
    fn model_json_round_trip(seed in any::<u64>(), n in 2usize..500) {
        let p = draw(&mut rng(seed), n);
        let back = ModelParams::from_json_str(&p.to_json().to_string()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn diffusion_json_round_trip(seed in any::<u64>()) {
        let dp = draw_diffusion(&mut rng(seed));
        let back = DiffusionParams::from_json_str(&serde_json::to_string(&dp).unwrap()).unwrap();
        prop_assert_eq!(back, dp);
    }

    #[test]
    fn rescaling_divides_rates(seed in any::<u64>(), n in 2usize..10_000) {
        let dp = draw_diffusion(&mut rng(seed));
        let p = dp.rescaled(n).unwrap();
        prop_assert!((p.u * n as f64 - dp.theta).abs() <= 1e-12 * dp.theta.max(1.0));
        let b = effective_branching_rate(&p.ftw_rates()) * n as f64;
        prop_assert!((b - effective_branching_rate(&dp.sigma)).abs() <= 1e-12 * b.max(1.0));
    }
}

#[test]
fn rational_strings_are_accepted() {
    let p = ModelParams::from_json_str(
        r#"{"N": 7, "u": "1/4", "nu0": "1/3", "selection": {"scheme": "ftw", "rates": [[2, "3/8"]]}}"#,
    )
    .unwrap();
    assert_eq!(p.u, 0.25);
    assert_eq!(p.nu0, 1.0 / 3.0);
    assert_eq!(p.ftw_rates()[&2], 0.375);
    assert!(parse_number("1/0").is_err());
    assert!(parse_number("x").is_err());
}

#[test]
fn dom_input_is_converted() {
    let p = ModelParams::from_json_str(
        r#"{"N": 5, "u": 0.1, "nu0": 0.5, "selection": {"scheme": "dom", "rates": [[1, 0.6], [2, 0.2]]}}"#,
    )
    .unwrap();
    let f = p.ftw_rates();
    assert!((f[&1] - 0.4).abs() < 1e-15);
    assert!((f[&2] - 0.2).abs() < 1e-15);
}

#[test]
fn invalid_inputs_are_rejected() {
    let gap = r#"{"N": 5, "u": 0.1, "nu0": 0.5, "selection": {"scheme": "dom", "rates": [[1, 0.6], [3, 0.2]]}}"#;
    assert!(matches!(
        ModelParams::from_json_str(gap),
        Err(Error::NonIncreasing { .. })
    ));
    let unknown = r#"{"N": 5, "u": 0.1, "nu0": 0.5, "extra": 1, "selection": {"scheme": "ftw", "rates": [[1, 0.6]]}}"#;
    assert!(ModelParams::from_json_str(unknown).is_err());
    assert!(ModelParams::ftw(5, -0.1, 0.5, [(1, 0.5)]).is_err());
    assert!(ModelParams::ftw(5, 0.1, 1.0, [(1, 0.5)]).is_err());
    assert!(matches!(
        ModelParams::ftw(5, 0.1, 0.5, []),
        Err(Error::TrivialNeutral)
    ));
}
