mod common;

use std::f64::consts::{PI, TAU};

use bellrank_core::behavior::{correlation_matrix, normalize_counts, SETTING_PAIRS};
use bellrank_core::chsh::{chsh_report, Classification, SignConvention, STRATEGY_COUNT};
use bellrank_core::rng::seeded_rng;
use bellrank_core::simulators::{
    lhv_behavior, mix_with_noise, pr_box_behavior, run_protocol, sample_trials, singlet_behavior, SessionPolicy,
    SharedStrategyResponder, SingletAngles,
};
use proptest::prelude::*;

fn s_max(b: &bellrank_core::behavior::BehaviorTable) -> f64 {
    chsh_report(&correlation_matrix(b)).s_max_abs
}

#[test]
fn singlet_respects_tsirelson_over_random_angles() {
    let mut rng = seeded_rng(1);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let a: [f64; 4] = std::array::from_fn(|_| rng.random_range(-TAU..TAU));
        let s = s_max(&singlet_behavior(&SingletAngles::new(a[0], a[1], a[2], a[3])));
        assert!(s <= 8f64.sqrt() + 1e-9, "{a:?}: {s}");
        worst = worst.max(s);
    }
    // Random search should come close to the optimum.
    assert!(worst > 2.7);
}

#[test]
fn singlet_optimum_and_equal_angles() {
    let b = singlet_behavior(&SingletAngles::new(0.0, PI / 2.0, PI / 4.0, 3.0 * PI / 4.0));
    assert!((s_max(&b) - 8f64.sqrt()).abs() < 1e-9);
    let r = chsh_report(&correlation_matrix(&b));
    assert_eq!(r.classification, Classification::QuantumCompatible);
}

#[test]
fn lhv_never_exceeds_two() {
    let mut rng = seeded_rng(2);
    for _ in 0..10_000 {
        let w: [f64; STRATEGY_COUNT] = common::random_simplex(&mut rng, STRATEGY_COUNT).try_into().unwrap();
        let s = s_max(&lhv_behavior(&w).unwrap());
        assert!(s <= 2.0 + 1e-12, "{s}");
    }
}

proptest! {
    #[test]
    fn s_is_affine_in_visibility(seed in any::<u64>(), v in 0.0f64..=1.0) {
        let b = common::random_nonsignalling(&mut seeded_rng(seed));
        let mixed = mix_with_noise(&b, v).unwrap();
        let (r, rm) = (chsh_report(&correlation_matrix(&b)), chsh_report(&correlation_matrix(&mixed)));
        for conv in SignConvention::ALL {
            prop_assert!((rm.value(conv) - v * r.value(conv)).abs() <= 1e-12);
        }
    }

    #[test]
    fn sampling_is_deterministic(seed in any::<u64>(), n in 1u64..500) {
        let b = common::random_nonsignalling(&mut seeded_rng(seed));
        let c1 = sample_trials(&b, n, seed).unwrap();
        prop_assert_eq!(&c1, &sample_trials(&b, n, seed).unwrap());
        for &(x, y) in &SETTING_PAIRS {
            prop_assert_eq!(c1.block_total(x, y), n);
        }
    }
}

#[test]
fn pr_box_samples_reach_four() {
    // Outcome parity is deterministic in every block, so the empirical S is exact.
    let counts = sample_trials(&pr_box_behavior(), 10_000, 5).unwrap();
    let s = s_max(&normalize_counts(&counts).unwrap());
    assert!((s - 4.0).abs() < 1e-12);
}

#[test]
fn singlet_samples_within_clt_band() {
    let b = singlet_behavior(&SingletAngles::new(0.0, PI / 2.0, PI / 4.0, 3.0 * PI / 4.0));
    let n = 100_000u64;
    let counts = sample_trials(&b, n, 8).unwrap();
    let s = s_max(&normalize_counts(&counts).unwrap());
    // Var(Ê) = (1 − E²)/n per block; four independent blocks.
    let se = (4.0 * (1.0 - 0.5) / n as f64).sqrt();
    assert!((s - 8f64.sqrt()).abs() < 3.0 * se, "{s}");
}

#[test]
fn protocol_setting_frequencies_are_uniform() {
    let weights = [1.0 / 16.0; STRATEGY_COUNT];
    for seed in 0..20 {
        let n = 20_000u64;
        let mut alice = SharedStrategyResponder::new(99, &weights).unwrap();
        let mut bob = alice.clone();
        let run = run_protocol(&mut alice, &mut bob, n, seed, SessionPolicy::PerTrial).unwrap();
        let sd = (n as f64 * 0.25 * 0.75).sqrt();
        for &(x, y) in &SETTING_PAIRS {
            let got = run.counts.block_total(x, y) as f64;
            assert!((got - n as f64 / 4.0).abs() <= 3.0 * sd, "seed {seed} block ({x},{y}): {got}");
        }
        assert_eq!(run.log.len() as u64, n);
    }
}

#[test]
fn lhv_protocol_classifies_local() {
    let mut rng = seeded_rng(3);
    for seed in 0..5 {
        let w: [f64; STRATEGY_COUNT] = common::random_simplex(&mut rng, STRATEGY_COUNT).try_into().unwrap();
        let mut alice = SharedStrategyResponder::new(seed + 100, &w).unwrap();
        let mut bob = alice.clone();
        let run = run_protocol(&mut alice, &mut bob, 100_000, seed, SessionPolicy::Never).unwrap();
        let report = chsh_report(&correlation_matrix(&normalize_counts(&run.counts).unwrap()));
        assert_eq!(report.classification, Classification::Local, "{}", report.s_max_abs);
    }
}
