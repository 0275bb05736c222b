use bellrank_core::behavior::{
    correlator, factorization_residual, nonsignalling_residual, normalize_counts, BehaviorTable, HiddenVariableModel,
    OutcomeCountTable, CELLS, SETTING_PAIRS,
};
use bellrank_core::chsh::{deterministic_strategy_behavior, STRATEGY_COUNT};
use proptest::prelude::*;

fn count_blocks(max: u64) -> impl Strategy<Value = [[[u64; 4]; 2]; 2]> {
    // Each block gets at least one observation so normalization is defined.
    prop::array::uniform4(prop::array::uniform4(0..=max)).prop_map(|blocks| {
        let mut out = [[[0u64; 4]; 2]; 2];
        for (j, &(x, y)) in SETTING_PAIRS.iter().enumerate() {
            out[x][y] = blocks[j];
            if out[x][y].iter().all(|&c| c == 0) {
                out[x][y][j % 4] = 1;
            }
        }
        out
    })
}

fn distribution(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, len).prop_map(|raw| {
        let raw: Vec<f64> = raw.into_iter().map(|v| v + 1e-3).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / total).collect()
    })
}

proptest! {
    #[test]
    fn normalized_counts_are_valid_behaviors(blocks in count_blocks(1_000_000)) {
        let b = normalize_counts(&OutcomeCountTable::from_blocks(blocks)).unwrap();
        // Round-trip through the validating constructor.
        prop_assert!(BehaviorTable::from_blocks(*b.blocks()).is_ok());
        for &(x, y) in &SETTING_PAIRS {
            prop_assert!(b.block(x, y).iter().all(|p| (0.0..=1.0).contains(p)));
        }
    }

    #[test]
    fn correlator_matches_integer_arithmetic(blocks in count_blocks(50)) {
        let counts = OutcomeCountTable::from_blocks(blocks);
        let b = normalize_counts(&counts).unwrap();
        for &(x, y) in &SETTING_PAIRS {
            let num: i64 = CELLS
                .iter()
                .map(|&(a, o)| i64::from(a.value() * o.value()) * counts.get(x, y, a, o) as i64)
                .sum();
            let den = counts.block_total(x, y) as i64;
            // Compare as rationals: |E·den − num| must be rounding noise only.
            let scaled = correlator(&b, x, y) * den as f64;
            prop_assert!((scaled - num as f64).abs() <= 1e-12 * den as f64, "{scaled} vs {num}/{den}");
        }
    }

    #[test]
    fn product_mixtures_are_nonsignalling(
        weights in distribution(5),
        marginals in prop::collection::vec((prop::array::uniform2(0.0f64..=1.0), prop::array::uniform2(0.0f64..=1.0)), 5),
    ) {
        let responses: Vec<BehaviorTable> =
            marginals.iter().map(|&(a, b)| BehaviorTable::product(a, b).unwrap()).collect();
        let model = HiddenVariableModel::new(weights, responses).unwrap();
        prop_assert!(nonsignalling_residual(&model.behavior()) <= 1e-12);
        prop_assert!(factorization_residual(&model) <= 1e-12);
    }

    #[test]
    fn deterministic_models_factorize(weights in distribution(STRATEGY_COUNT)) {
        let responses: Vec<BehaviorTable> =
            (0..STRATEGY_COUNT).map(|k| deterministic_strategy_behavior(k).unwrap()).collect();
        let model = HiddenVariableModel::new(weights, responses).unwrap();
        prop_assert_eq!(factorization_residual(&model), 0.0);
    }
}

#[test]
fn unobserved_block_is_rejected() {
    let mut blocks = [[[5u64; 4]; 2]; 2];
    blocks[1][0] = [0; 4];
    assert!(normalize_counts(&OutcomeCountTable::from_blocks(blocks)).is_err());
}
