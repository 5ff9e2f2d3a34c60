use std::f64::consts::{PI, SQRT_2};

use proptest::prelude::*;
use qnd_core::bell_operator::{
    bell_operator, chsh_operator, qnd_compatibility_check, BellOperatorSpec, Direction, DirectionPair, Network,
};
use qnd_core::HadamardConvention;

fn direction(theta: f64, phi: f64) -> Direction {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

fn pair_strategy() -> impl Strategy<Value = DirectionPair> {
    (0.0..PI, 0.0..2.0 * PI, 0.0..PI, 0.0..2.0 * PI)
        .prop_map(|(t1, p1, t2, p2)| DirectionPair::new(direction(t1, p1), direction(t2, p2)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn chsh_never_exceeds_tsirelson(pairs in prop::collection::vec(pair_strategy(), 2)) {
        let spec = BellOperatorSpec::new(pairs).unwrap();
        let b = chsh_operator(&spec).unwrap();
        prop_assert!(b.hermiticity_error() < 1e-12);
        prop_assert!(b.spectral_radius() <= 2.0 * SQRT_2 + 1e-9);
    }

    #[test]
    fn n_particle_bound(pairs in prop::collection::vec(pair_strategy(), 3..=4)) {
        let n = pairs.len();
        let spec = BellOperatorSpec::new(pairs).unwrap();
        let b = bell_operator(&spec).unwrap();
        prop_assert!(b.hermiticity_error() < 1e-12);
        prop_assert!(b.spectral_radius() <= 2f64.powf((n as f64 + 1.0) / 2.0) + 1e-9);
    }
}

#[test]
fn canonical_settings_saturate_the_bound() {
    for n in 2..=6 {
        let b = bell_operator(&BellOperatorSpec::canonical(n).unwrap()).unwrap();
        let bound = 2f64.powf((n as f64 + 1.0) / 2.0);
        assert!((b.spectral_radius() - bound).abs() < 1e-9, "n = {n}");
    }
}

#[test]
fn spec_json_round_trip() {
    let spec = BellOperatorSpec::canonical(3).unwrap();
    let text = serde_json::to_string(&spec).unwrap();
    assert!(text.starts_with("{\"directions\":"));
    assert_eq!(BellOperatorSpec::from_json(&text).unwrap(), spec);
    assert!(BellOperatorSpec::from_json(
        r#"{"directions":[{"a":[1,0,0],"a_prime":[2,0,0]},{"a":[1,0,0],"a_prime":[0,1,0]}]}"#
    )
    .is_err());
    assert!(BellOperatorSpec::from_json(r#"{"directions":[{"a":[1,0,0],"a_prime":[0,1,0]}]}"#).is_err());
}

#[test]
fn canonical_chsh_is_compatible_with_bell_network() {
    let b = chsh_operator(&BellOperatorSpec::canonical_chsh()).unwrap();
    for convention in [HadamardConvention::Paper, HadamardConvention::Standard] {
        let report = qnd_compatibility_check(&b, &Network::bell(convention)).unwrap();
        assert!(report.max_commutator_norm() < 1e-10);
        assert!(report.all_self_mapped(1e-9));
    }
}

#[test]
fn canonical_operator_is_compatible_with_ghz_network() {
    for n in 3..=5 {
        let b = bell_operator(&BellOperatorSpec::canonical(n).unwrap()).unwrap();
        let report = qnd_compatibility_check(&b, &Network::ghz(n, HadamardConvention::Standard).unwrap()).unwrap();
        assert!(report.max_commutator_norm() < 1e-10, "n = {n}");
        assert!(report.all_self_mapped(1e-9));
    }
}

#[test]
fn generic_setting_is_not_compatible() {
    let spec = BellOperatorSpec::new(vec![
        DirectionPair::new(direction(0.3, 0.1), direction(1.1, 2.0)),
        DirectionPair::new(direction(2.0, 0.7), direction(0.4, 4.0)),
    ])
    .unwrap();
    let b = chsh_operator(&spec).unwrap();
    let report = qnd_compatibility_check(&b, &Network::bell(HadamardConvention::Paper)).unwrap();
    assert!(report.max_commutator_norm() > 1e-3);
}
