mod support;

use proptest::prelude::*;
use support::{network_soundness, residual_soundness, Tally};

#[test]
fn network_bounds_contain_sampled_extremes() {
    let mut t = Tally::default();
    for seed in 0..12 {
        t.merge(network_soundness(seed, 10_000));
    }
    assert!(t.violations.is_empty(), "{:#?}", t.violations);
    assert!(t.checks >= 12 * 6);
}

#[test]
fn residual_bounds_contain_sampled_extremes() {
    let mut t = Tally::default();
    for seed in 0..12 {
        t.merge(residual_soundness(seed, 10_000));
    }
    assert!(t.violations.is_empty(), "{:#?}", t.violations);
    assert_eq!(t.checks, 12 * 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn any_seed_is_sound(seed in 1000u64..1_000_000) {
        let mut t = network_soundness(seed, 2000);
        t.merge(residual_soundness(seed, 2000));
        prop_assert!(t.violations.is_empty(), "{:#?}", t.violations);
    }
}
