//! Bipartite measurement statistics with binary settings and ±1 outcomes.
//!
//! Every table is indexed `[x][y][cell]` where `cell = 2·bit(a) + bit(b)` and
//! an outcome maps to its bit through `a = (−1)^bit`, so `+1 ↦ 0`, `−1 ↦ 1`.

use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Tolerance for probability normalization checks.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// A single ±1 measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const ALL: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    /// Parses a ±1 value.
    pub fn from_value(v: i64) -> Option<Self> {
        match v {
            1 => Some(Outcome::Plus),
            -1 => Some(Outcome::Minus),
            _ => None,
        }
    }

    /// Parses a bit through `a = (−1)^bit`.
    pub fn from_bit(bit: i64) -> Option<Self> {
        match bit {
            0 => Some(Outcome::Plus),
            1 => Some(Outcome::Minus),
            _ => None,
        }
    }

    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn bit(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }

    fn sign(self) -> f64 {
        f64::from(self.value())
    }
}

/// Index of the `(a, b)` cell inside a 4-cell block.
pub fn cell_index(a: Outcome, b: Outcome) -> usize {
    2 * a.bit() + b.bit()
}

/// The four `(a, b)` cells in block order.
pub const CELLS: [(Outcome, Outcome); 4] = [
    (Outcome::Plus, Outcome::Plus),
    (Outcome::Plus, Outcome::Minus),
    (Outcome::Minus, Outcome::Plus),
    (Outcome::Minus, Outcome::Minus),
];

/// The four `(x, y)` setting pairs in block order.
pub const SETTING_PAIRS: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

fn check_setting(what: &'static str, s: usize) -> Result<()> {
    if s < 2 {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { what, index: s })
    }
}

/// Raw tallies `n(a,b|x,y)`. All 16 cells are always present.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OutcomeCountTable {
    counts: [[[u64; 4]; 2]; 2],
}

impl OutcomeCountTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_blocks(counts: [[[u64; 4]; 2]; 2]) -> Self {
        Self { counts }
    }

    /// Adds `n` observations of `(a, b)` under settings `(x, y)`.
    pub fn add(&mut self, x: usize, y: usize, a: Outcome, b: Outcome, n: u64) -> Result<()> {
        check_setting("setting x", x)?;
        check_setting("setting y", y)?;
        let cell = &mut self.counts[x][y][cell_index(a, b)];
        *cell = cell.saturating_add(n);
        Ok(())
    }

    pub fn get(&self, x: usize, y: usize, a: Outcome, b: Outcome) -> u64 {
        self.counts[x][y][cell_index(a, b)]
    }

    pub fn block(&self, x: usize, y: usize) -> [u64; 4] {
        self.counts[x][y]
    }

    pub fn block_total(&self, x: usize, y: usize) -> u64 {
        self.counts[x][y].iter().sum()
    }

    pub fn total(&self) -> u64 {
        SETTING_PAIRS.iter().map(|&(x, y)| self.block_total(x, y)).sum()
    }

    pub fn blocks(&self) -> &[[[u64; 4]; 2]; 2] {
        &self.counts
    }

    /// `Some((x, y))` for the first setting pair that was never observed.
    pub fn first_empty_block(&self) -> Option<(usize, usize)> {
        SETTING_PAIRS.iter().copied().find(|&(x, y)| self.block_total(x, y) == 0)
    }
}

/// Conditional distributions `P(a,b|x,y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorTable {
    probs: [[[f64; 4]; 2]; 2],
}

impl BehaviorTable {
    /// Validates and wraps a probability table. Never renormalizes.
    pub fn from_blocks(probs: [[[f64; 4]; 2]; 2]) -> Result<Self> {
        for &(x, y) in &SETTING_PAIRS {
            let block = &probs[x][y];
            if block.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::InvalidBehavior(format!("block ({x},{y}) has a negative or non-finite entry")));
            }
            let sum: f64 = block.iter().sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
                return Err(Error::InvalidBehavior(format!("block ({x},{y}) sums to {sum}")));
            }
        }
        Ok(Self { probs })
    }

    /// `P = 1/4` in every cell.
    pub fn uniform() -> Self {
        Self { probs: [[[0.25; 4]; 2]; 2] }
    }

    /// Product behavior `P(a|x)·P(b|y)` from Alice's and Bob's `P(+1|setting)`.
    pub fn product(alice_plus: [f64; 2], bob_plus: [f64; 2]) -> Result<Self> {
        let mut probs = [[[0.0; 4]; 2]; 2];
        for &(x, y) in &SETTING_PAIRS {
            for (cell, &(a, b)) in CELLS.iter().enumerate() {
                let pa = if a == Outcome::Plus { alice_plus[x] } else { 1.0 - alice_plus[x] };
                let pb = if b == Outcome::Plus { bob_plus[y] } else { 1.0 - bob_plus[y] };
                probs[x][y][cell] = pa * pb;
            }
        }
        Self::from_blocks(probs)
    }

    pub fn prob(&self, x: usize, y: usize, a: Outcome, b: Outcome) -> f64 {
        self.probs[x][y][cell_index(a, b)]
    }

    pub fn block(&self, x: usize, y: usize) -> [f64; 4] {
        self.probs[x][y]
    }

    pub fn blocks(&self) -> &[[[f64; 4]; 2]; 2] {
        &self.probs
    }

    /// Alice's marginal `P(a|x, y)`.
    pub fn alice_marginal(&self, x: usize, y: usize, a: Outcome) -> f64 {
        Outcome::ALL.iter().map(|&b| self.prob(x, y, a, b)).sum()
    }

    /// Bob's marginal `P(b|x, y)`.
    pub fn bob_marginal(&self, x: usize, y: usize, b: Outcome) -> f64 {
        Outcome::ALL.iter().map(|&a| self.prob(x, y, a, b)).sum()
    }

    /// Maximum absolute cell difference to another table.
    pub fn max_abs_diff(&self, other: &BehaviorTable) -> f64 {
        let mut worst = 0.0f64;
        for &(x, y) in &SETTING_PAIRS {
            for cell in 0..4 {
                worst = worst.max((self.probs[x][y][cell] - other.probs[x][y][cell]).abs());
            }
        }
        worst
    }

    /// Cellwise `Σ_k w_k · tables[k]`. Weights are assumed to be a distribution.
    pub(crate) fn mixture<'a>(parts: impl IntoIterator<Item = (f64, &'a BehaviorTable)>) -> Self {
        let mut probs = [[[0.0; 4]; 2]; 2];
        for (w, table) in parts {
            for &(x, y) in &SETTING_PAIRS {
                for cell in 0..4 {
                    probs[x][y][cell] += w * table.probs[x][y][cell];
                }
            }
        }
        Self { probs }
    }
}

/// Empirical conditional distributions from raw counts.
pub fn normalize_counts(counts: &OutcomeCountTable) -> Result<BehaviorTable> {
    if let Some((x, y)) = counts.first_empty_block() {
        return Err(Error::EmptyBlock { x, y });
    }
    let mut probs = [[[0.0; 4]; 2]; 2];
    for &(x, y) in &SETTING_PAIRS {
        let total = counts.block_total(x, y) as f64;
        for cell in 0..4 {
            probs[x][y][cell] = counts.counts[x][y][cell] as f64 / total;
        }
    }
    Ok(BehaviorTable { probs })
}

/// `E(A_x B_y) = Σ_{a,b} a·b·P(a,b|x,y)`.
pub fn correlator(behavior: &BehaviorTable, x: usize, y: usize) -> f64 {
    CELLS.iter().map(|&(a, b)| a.sign() * b.sign() * behavior.prob(x, y, a, b)).sum()
}

/// The 2×2 matrix of correlators `e[x][y] = E(A_x B_y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CorrelationMatrix {
    e: [[f64; 2]; 2],
}

impl CorrelationMatrix {
    pub fn new(e: [[f64; 2]; 2]) -> Result<Self> {
        for row in &e {
            for &v in row {
                if !v.is_finite() || v.abs() > 1.0 + NORMALIZATION_TOLERANCE {
                    return Err(Error::InvalidBehavior(format!("correlator {v} outside [-1, 1]")));
                }
            }
        }
        Ok(Self { e })
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.e[x][y]
    }

    pub fn entries(&self) -> [[f64; 2]; 2] {
        self.e
    }
}

pub fn correlation_matrix(behavior: &BehaviorTable) -> CorrelationMatrix {
    let mut e = [[0.0; 2]; 2];
    for &(x, y) in &SETTING_PAIRS {
        e[x][y] = correlator(behavior, x, y);
    }
    CorrelationMatrix { e }
}

/// Largest change in one party's marginal when only the distant setting changes.
///
/// Zero means the behavior is nonsignalling up to rounding.
pub fn nonsignalling_residual(behavior: &BehaviorTable) -> f64 {
    let mut worst = 0.0f64;
    for s in 0..2 {
        for &o in &Outcome::ALL {
            let alice = behavior.alice_marginal(s, 0, o) - behavior.alice_marginal(s, 1, o);
            let bob = behavior.bob_marginal(0, s, o) - behavior.bob_marginal(1, s, o);
            worst = worst.max(alice.abs()).max(bob.abs());
        }
    }
    worst
}

/// Hidden-variable model: weights over λ, a response behavior per λ and,
/// optionally, setting-dependent weights `P(λ|x,y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenVariableModel {
    weights: Vec<f64>,
    responses: Vec<BehaviorTable>,
    setting_weights: Option<[[Vec<f64>; 2]; 2]>,
}

fn check_distribution(what: &str, w: &[f64]) -> Result<()> {
    if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidModel(format!("{what} has a negative or non-finite weight")));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::InvalidModel(format!("{what} sums to {sum}")));
    }
    Ok(())
}

impl HiddenVariableModel {
    pub fn new(weights: Vec<f64>, responses: Vec<BehaviorTable>) -> Result<Self> {
        if weights.is_empty() || weights.len() != responses.len() {
            return Err(Error::InvalidModel(format!("{} weights for {} responses", weights.len(), responses.len())));
        }
        check_distribution("lambda weights", &weights)?;
        Ok(Self { weights, responses, setting_weights: None })
    }

    /// Attaches `P(λ|x,y)`, indexed `[x][y][λ]`.
    pub fn with_setting_weights(mut self, setting_weights: [[Vec<f64>; 2]; 2]) -> Result<Self> {
        for &(x, y) in &SETTING_PAIRS {
            let w = &setting_weights[x][y];
            if w.len() != self.weights.len() {
                return Err(Error::InvalidModel(format!(
                    "P(lambda|{x},{y}) has {} entries, expected {}",
                    w.len(),
                    self.weights.len()
                )));
            }
            check_distribution("setting-dependent weights", w)?;
        }
        self.setting_weights = Some(setting_weights);
        Ok(self)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn responses(&self) -> &[BehaviorTable] {
        &self.responses
    }

    pub fn setting_weights(&self) -> Option<&[[Vec<f64>; 2]; 2]> {
        self.setting_weights.as_ref()
    }

    /// Observable behavior `Σ_λ P(λ|x,y) P(a,b|x,y,λ)`, using `P(λ)` when no
    /// setting-dependent weights are attached.
    pub fn behavior(&self) -> BehaviorTable {
        let mut probs = [[[0.0; 4]; 2]; 2];
        for &(x, y) in &SETTING_PAIRS {
            let w = match &self.setting_weights {
                Some(sw) => &sw[x][y],
                None => &self.weights,
            };
            for (lambda, response) in self.responses.iter().enumerate() {
                for cell in 0..4 {
                    probs[x][y][cell] += w[lambda] * response.probs[x][y][cell];
                }
            }
        }
        BehaviorTable { probs }
    }
}

/// `max |P(a,b|x,y,λ) − P(a|x,λ)·P(b|y,λ)|` over all λ, settings and outcomes,
/// with single-party factors taken as marginals of each joint response.
pub fn factorization_residual(model: &HiddenVariableModel) -> f64 {
    let mut worst = 0.0f64;
    for response in &model.responses {
        for &(x, y) in &SETTING_PAIRS {
            for &(a, b) in &CELLS {
                let product = response.alice_marginal(x, y, a) * response.bob_marginal(x, y, b);
                worst = worst.max((response.prob(x, y, a, b) - product).abs());
            }
        }
    }
    worst
}

/// `max |P(λ|x,y) − P(λ)|` with `P(λ)` the average under uniformly chosen settings.
pub fn measurement_independence_residual(model: &HiddenVariableModel) -> Result<f64> {
    measurement_independence_residual_with_prior(model, [[0.25; 2]; 2])
}

/// As [`measurement_independence_residual`], with `P(λ)` averaged under the
/// supplied setting prior `[x][y]`.
pub fn measurement_independence_residual_with_prior(
    model: &HiddenVariableModel,
    setting_prior: [[f64; 2]; 2],
) -> Result<f64> {
    let sw = model.setting_weights.as_ref().ok_or(Error::MissingSettingWeights)?;
    let flat: Vec<f64> = SETTING_PAIRS.iter().map(|&(x, y)| setting_prior[x][y]).collect();
    check_distribution("setting prior", &flat)
        .map_err(|_| Error::InvalidArgument(format!("setting prior {setting_prior:?} is not a distribution")))?;
    let mut worst = 0.0f64;
    for lambda in 0..model.weights.len() {
        let marginal: f64 = SETTING_PAIRS.iter().map(|&(x, y)| setting_prior[x][y] * sw[x][y][lambda]).sum();
        for &(x, y) in &SETTING_PAIRS {
            worst = worst.max((sw[x][y][lambda] - marginal).abs());
        }
    }
    Ok(worst)
}
