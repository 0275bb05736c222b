//! Counter-based seeding and multinomial draws.
//!
//! Replicate `i` of a run seeded with `seed` always uses the generator
//! [`replicate_rng`]`(seed, i)`, so results do not depend on the order in
//! which replicates are evaluated.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable mix of `(seed, index)` into a 64-bit stream seed.
pub fn replicate_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(index).rotate_left(17))
}

pub fn replicate_rng(seed: u64, index: u64) -> Rng {
    Rng::seed_from_u64(replicate_seed(seed, index))
}

pub fn seeded_rng(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Draws `n` items over the categories with probabilities `probs`
/// (which must sum to one) through sequential conditional binomials.
pub fn multinomial<R: rand::Rng + ?Sized>(rng: &mut R, n: u64, probs: &[f64]) -> Vec<u64> {
    let mut out = alloc::vec![0u64; probs.len()];
    let mut remaining_n = n;
    let mut remaining_p = 1.0f64;
    let last = probs.len().saturating_sub(1);
    for (j, &p) in probs.iter().enumerate() {
        if remaining_n == 0 {
            break;
        }
        if j == last {
            out[j] = remaining_n;
            break;
        }
        let q = if remaining_p > 0.0 { (p / remaining_p).clamp(0.0, 1.0) } else { 0.0 };
        let draw = if q >= 1.0 {
            remaining_n
        } else if q <= 0.0 {
            0
        } else {
            Binomial::new(remaining_n, q).expect("q in (0,1)").sample(rng)
        };
        out[j] = draw;
        remaining_n -= draw;
        remaining_p -= p;
    }
    out
}
