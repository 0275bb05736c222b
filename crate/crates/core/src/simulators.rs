//! Ground-truth behaviors, trial sampling and the randomized-settings protocol.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::Rng as _;
use thiserror::Error;

use crate::behavior::{cell_index, BehaviorTable, Outcome, OutcomeCountTable, CELLS, SETTING_PAIRS};
use crate::chsh::{deterministic_strategy_behavior, DeterministicStrategy, STRATEGY_COUNT};
use crate::inference::TrialRecord;
use crate::rng::{multinomial, replicate_rng, seeded_rng};
use crate::{Error, Result};

/// PR box: `P(a,b|x,y) = 1/2` when `bit(a) ⊕ bit(b) = x·y`, else 0.
pub fn pr_box_behavior() -> BehaviorTable {
    let mut probs = [[[0.0; 4]; 2]; 2];
    for &(x, y) in &SETTING_PAIRS {
        for &(a, b) in &CELLS {
            if a.bit() ^ b.bit() == x & y {
                probs[x][y][cell_index(a, b)] = 0.5;
            }
        }
    }
    BehaviorTable::from_blocks(probs).expect("PR box is normalized")
}

/// Measurement angles for the singlet, stored modulo 2π.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SingletAngles {
    pub alice: [f64; 2],
    pub bob: [f64; 2],
}

fn wrap_angle(v: f64) -> f64 {
    let r = libm::fmod(v, TAU);
    if r < 0.0 {
        r + TAU
    } else {
        r
    }
}

impl SingletAngles {
    pub fn new(a0: f64, a1: f64, b0: f64, b1: f64) -> Self {
        Self { alice: [wrap_angle(a0), wrap_angle(a1)], bob: [wrap_angle(b0), wrap_angle(b1)] }
    }

    pub fn try_new(a0: f64, a1: f64, b0: f64, b1: f64) -> Result<Self> {
        if [a0, a1, b0, b1].iter().all(|v| v.is_finite()) {
            Ok(Self::new(a0, a1, b0, b1))
        } else {
            Err(Error::InvalidArgument("singlet angles must be finite".into()))
        }
    }
}

/// Singlet correlations `E = −cos(θ_a − θ_b)` with uniform marginals.
pub fn singlet_behavior(angles: &SingletAngles) -> BehaviorTable {
    let mut probs = [[[0.0; 4]; 2]; 2];
    for &(x, y) in &SETTING_PAIRS {
        let e = -libm::cos(angles.alice[x] - angles.bob[y]);
        for &(a, b) in &CELLS {
            let ab = f64::from(a.value() * b.value());
            probs[x][y][cell_index(a, b)] = (1.0 + ab * e) / 4.0;
        }
    }
    // Four cells sum to exactly 1 up to one rounding per term.
    BehaviorTable::from_blocks(probs).expect("singlet cells sum to one")
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidArgument("strategy weights must be finite and >= 0".into()));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > crate::behavior::NORMALIZATION_TOLERANCE {
        return Err(Error::InvalidArgument(alloc::format!("strategy weights sum to {sum}")));
    }
    Ok(())
}

/// Convex mixture of the 16 deterministic strategies.
pub fn lhv_behavior(weights: &[f64; STRATEGY_COUNT]) -> Result<BehaviorTable> {
    check_weights(weights)?;
    let vertices: Vec<BehaviorTable> =
        (0..STRATEGY_COUNT).map(|k| deterministic_strategy_behavior(k).expect("k < 16")).collect();
    Ok(BehaviorTable::mixture(weights.iter().copied().zip(vertices.iter())))
}

/// `v·behavior + (1 − v)·uniform`.
pub fn mix_with_noise(behavior: &BehaviorTable, visibility: f64) -> Result<BehaviorTable> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::VisibilityOutOfRange(visibility));
    }
    let uniform = BehaviorTable::uniform();
    Ok(BehaviorTable::mixture([(visibility, behavior), (1.0 - visibility, &uniform)]))
}

/// Multinomial draw of `n_per_block` trials per setting pair. Block `j`
/// (in `00, 01, 10, 11` order) uses `replicate_rng(seed, j)`.
pub fn sample_trials(behavior: &BehaviorTable, n_per_block: u64, seed: u64) -> Result<OutcomeCountTable> {
    if n_per_block == 0 {
        return Err(Error::InvalidArgument("n_per_block must be >= 1".into()));
    }
    let mut blocks = [[[0u64; 4]; 2]; 2];
    for (j, &(x, y)) in SETTING_PAIRS.iter().enumerate() {
        let mut rng = replicate_rng(seed, j as u64);
        let draw = multinomial(&mut rng, n_per_block, &behavior.block(x, y));
        blocks[x][y].copy_from_slice(&draw);
    }
    Ok(OutcomeCountTable::from_blocks(blocks))
}

/// Like [`sample_trials`] but returns one record per trial, in block order.
pub fn sample_trial_records(
    behavior: &BehaviorTable,
    n_per_block: u64,
    seed: u64,
    participant_id: &str,
) -> Result<Vec<TrialRecord>> {
    let counts = sample_trials(behavior, n_per_block, seed)?;
    let mut out = Vec::with_capacity(4 * n_per_block as usize);
    for &(x, y) in &SETTING_PAIRS {
        for &(a, b) in &CELLS {
            for _ in 0..counts.get(x, y, a, b) {
                out.push(TrialRecord::new(participant_id, x, y, a, b)?);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Role {
    Alice,
    Bob,
}

/// What a responder sees on each trial: its own role and setting only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Query {
    pub role: Role,
    pub setting: usize,
    pub trial: u64,
    pub session: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct ResponderError(pub String);

/// One party of the protocol. The call signature carries no channel for the
/// remote setting.
pub trait Responder {
    fn respond(&mut self, query: &Query) -> core::result::Result<Outcome, ResponderError>;
}

impl<F> Responder for F
where
    F: FnMut(&Query) -> core::result::Result<Outcome, ResponderError>,
{
    fn respond(&mut self, query: &Query) -> core::result::Result<Outcome, ResponderError> {
        self(query)
    }
}

/// When a responder starts a fresh session.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum SessionPolicy {
    /// Every trial runs in its own session (token = trial index).
    PerTrial,
    /// One persistent session per local setting (token = own setting).
    PerBlock,
    /// A single session for the whole run (token 0).
    Never,
}

impl SessionPolicy {
    fn token(self, trial: u64, own_setting: usize) -> u64 {
        match self {
            SessionPolicy::PerTrial => trial,
            SessionPolicy::PerBlock => own_setting as u64,
            SessionPolicy::Never => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ProtocolRecord {
    pub trial: u64,
    pub x: usize,
    pub y: usize,
    pub a: i8,
    pub b: i8,
    pub alice_session: u64,
    pub bob_session: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRun {
    pub counts: OutcomeCountTable,
    pub log: Vec<ProtocolRecord>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("{role:?} failed on trial {trial}: {source}")]
    ResponderFailure {
        role: Role,
        trial: u64,
        source: ResponderError,
        /// Tallies and log of the trials completed before the failure.
        partial: Box<ProtocolRun>,
    },
}

/// Runs `n_trials` rounds with settings drawn uniformly from a generator
/// seeded by `seed`, which the responders never see.
pub fn run_protocol(
    alice: &mut dyn Responder,
    bob: &mut dyn Responder,
    n_trials: u64,
    seed: u64,
    policy: SessionPolicy,
) -> core::result::Result<ProtocolRun, ProtocolError> {
    let mut settings_rng = seeded_rng(seed);
    let mut run = ProtocolRun { counts: OutcomeCountTable::new(), log: Vec::new() };
    for trial in 0..n_trials {
        let x = settings_rng.random_range(0..2usize);
        let y = settings_rng.random_range(0..2usize);
        let alice_session = policy.token(trial, x);
        let bob_session = policy.token(trial, y);
        let fail = |role, source, run: ProtocolRun| ProtocolError::ResponderFailure {
            role,
            trial,
            source,
            partial: Box::new(run),
        };
        let a = match alice.respond(&Query { role: Role::Alice, setting: x, trial, session: alice_session }) {
            Ok(a) => a,
            Err(e) => return Err(fail(Role::Alice, e, run)),
        };
        let b = match bob.respond(&Query { role: Role::Bob, setting: y, trial, session: bob_session }) {
            Ok(b) => b,
            Err(e) => return Err(fail(Role::Bob, e, run)),
        };
        run.counts.add(x, y, a, b, 1).expect("settings are 0 or 1");
        run.log.push(ProtocolRecord { trial, x, y, a: a.value(), b: b.value(), alice_session, bob_session });
    }
    Ok(run)
}

/// Responder that plays one side of a fixed deterministic strategy.
#[derive(Debug, Clone, Copy)]
pub struct DeterministicResponder {
    pub strategy: DeterministicStrategy,
}

impl Responder for DeterministicResponder {
    fn respond(&mut self, query: &Query) -> core::result::Result<Outcome, ResponderError> {
        Ok(match query.role {
            Role::Alice => self.strategy.alice[query.setting],
            Role::Bob => self.strategy.bob[query.setting],
        })
    }
}

/// Local hidden-variable responder: both parties derive the same strategy per
/// trial from a pre-agreed seed, independent of the settings.
#[derive(Debug, Clone)]
pub struct SharedStrategyResponder {
    shared_seed: u64,
    cumulative: [f64; STRATEGY_COUNT],
}

impl SharedStrategyResponder {
    pub fn new(shared_seed: u64, weights: &[f64; STRATEGY_COUNT]) -> Result<Self> {
        check_weights(weights)?;
        let mut cumulative = [0.0; STRATEGY_COUNT];
        let mut acc = 0.0;
        for (c, w) in cumulative.iter_mut().zip(weights) {
            acc += w;
            *c = acc;
        }
        Ok(Self { shared_seed, cumulative })
    }

    fn strategy_for(&self, trial: u64) -> DeterministicStrategy {
        let u: f64 = replicate_rng(self.shared_seed, trial).random();
        let k = self.cumulative.iter().position(|&c| u < c).unwrap_or(STRATEGY_COUNT - 1);
        DeterministicStrategy::from_index(k).expect("k < 16")
    }
}

impl Responder for SharedStrategyResponder {
    fn respond(&mut self, query: &Query) -> core::result::Result<Outcome, ResponderError> {
        let strategy = self.strategy_for(query.trial);
        Ok(match query.role {
            Role::Alice => strategy.alice[query.setting],
            Role::Bob => strategy.bob[query.setting],
        })
    }
}
