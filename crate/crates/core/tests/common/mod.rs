//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use bellrank_core::behavior::BehaviorTable;
use bellrank_core::chsh::{deterministic_strategy_behavior, STRATEGY_COUNT};
use bellrank_core::rng::Rng;
use rand::Rng as _;

pub type Blocks = [[[f64; 4]; 2]; 2];

/// Cell order `(+,+), (+,−), (−,+), (−,−)`, i.e. `2·bit(a) + bit(b)`.
pub fn pr_variant(alpha: usize, beta: usize, gamma: usize) -> Blocks {
    let mut p = [[[0.0; 4]; 2]; 2];
    for x in 0..2 {
        for y in 0..2 {
            let target = (x & y) ^ (alpha & x) ^ (beta & y) ^ gamma;
            for ab in 0..4 {
                if (ab >> 1) ^ (ab & 1) == target {
                    p[x][y][ab] = 0.5;
                }
            }
        }
    }
    p
}

pub fn uniform() -> Blocks {
    [[[0.25; 4]; 2]; 2]
}

pub fn strategy(k: usize) -> Blocks {
    *deterministic_strategy_behavior(k).unwrap().blocks()
}

pub fn mix(parts: &[(f64, Blocks)]) -> Blocks {
    let mut out = [[[0.0; 4]; 2]; 2];
    for (w, b) in parts {
        for x in 0..2 {
            for y in 0..2 {
                for c in 0..4 {
                    out[x][y][c] += w * b[x][y][c];
                }
            }
        }
    }
    out
}

pub fn random_simplex(rng: &mut Rng, n: usize) -> Vec<f64> {
    // Exponential spacings give a uniform point on the simplex.
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

pub fn random_local(rng: &mut Rng) -> Blocks {
    let w = random_simplex(rng, STRATEGY_COUNT);
    let parts: Vec<(f64, Blocks)> = w.iter().enumerate().map(|(k, &w)| (w, strategy(k))).collect();
    mix(&parts)
}

pub fn random_pr_variant(rng: &mut Rng) -> Blocks {
    pr_variant(rng.random_range(0..2), rng.random_range(0..2), rng.random_range(0..2))
}

/// Random nonsignalling behavior: mixtures of deterministic strategies,
/// PR-box variants and white noise, including exact boundary cases.
pub fn random_nonsignalling(rng: &mut Rng) -> BehaviorTable {
    let blocks = match rng.random_range(0..6) {
        0 => random_local(rng),
        1 => {
            let w: f64 = rng.random();
            mix(&[(w, random_pr_variant(rng)), (1.0 - w, random_local(rng))])
        }
        2 => {
            let v: f64 = rng.random();
            mix(&[(v, random_pr_variant(rng)), (1.0 - v, uniform())])
        }
        // Facet of the local polytope: S = 2 exactly.
        3 => mix(&[(0.5, random_pr_variant(rng)), (0.5, uniform())]),
        4 => {
            let w = random_simplex(rng, 3);
            mix(&[(w[0], random_pr_variant(rng)), (w[1], random_pr_variant(rng)), (w[2], random_local(rng))])
        }
        _ => strategy(rng.random_range(0..STRATEGY_COUNT)),
    };
    BehaviorTable::from_blocks(blocks).unwrap()
}

/// The eight CHSH values computed directly from cell probabilities.
pub fn chsh_values_direct(p: &Blocks) -> [f64; 8] {
    let e = |x: usize, y: usize| p[x][y][0] - p[x][y][1] - p[x][y][2] + p[x][y][3];
    let e = [e(0, 0), e(0, 1), e(1, 0), e(1, 1)];
    let mut out = [0.0; 8];
    let mut n = 0;
    for minus in 0..4 {
        let s: f64 = (0..4).map(|j| if j == minus { -e[j] } else { e[j] }).sum();
        out[n] = s;
        out[n + 1] = -s;
        n += 2;
    }
    out
}

/// Two-sided p-value of Student's t by composite Simpson integration of the
/// density, independent of the incomplete-beta route.
pub fn t_two_sided_p_quadrature(t: f64, df: f64) -> f64 {
    let ln_c = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    let density = |u: f64| (ln_c - (df + 1.0) / 2.0 * (1.0 + u * u / df).ln()).exp();
    let n = 200_000;
    let h = t.abs() / n as f64;
    let mut acc = density(0.0) + density(t.abs());
    for i in 1..n {
        acc += density(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let central = acc * h / 3.0;
    1.0 - 2.0 * central
}

/// Lanczos approximation (g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}
