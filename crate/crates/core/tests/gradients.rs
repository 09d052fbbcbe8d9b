mod support;

use proptest::prelude::*;
use support::gradcheck::*;

const TOL: f64 = 1e-4;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nlm_plus_penalty(seed in any::<u64>()) {
        if let Some(e) = check_nlm(seed) {
            prop_assert!(e < TOL, "relative error {e}");
        }
    }

    #[test]
    fn graph_distance_plus_penalty(seed in any::<u64>()) {
        if let Some(e) = check_gd(seed) {
            prop_assert!(e < TOL, "relative error {e}");
        }
    }

    #[test]
    fn transe_hinge(seed in any::<u64>()) {
        if let Some(e) = check_transe(seed) {
            prop_assert!(e < TOL, "relative error {e}");
        }
    }

    #[test]
    fn ntn_hinge(seed in any::<u64>()) {
        if let Some(e) = check_ntn(seed) {
            prop_assert!(e < TOL, "relative error {e}");
        }
    }

    #[test]
    fn penalty_term(seed in any::<u64>()) {
        let e = check_penalty(seed);
        prop_assert!(e < 1e-6, "relative error {e}");
    }
}

#[test]
fn worst_case_over_fixed_seeds() {
    for (name, check) in [
        ("nlm", check_nlm as fn(u64) -> Option<f64>),
        ("gd", check_gd),
        ("transe", check_transe),
        ("ntn", check_ntn),
    ] {
        let worst = worst_over(100, 1000, check);
        eprintln!("{name}: worst relative error {worst:.3e}");
        assert!(worst < TOL, "{name}: {worst}");
    }
}
