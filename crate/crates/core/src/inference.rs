//! Uncertainty quantification for CHSH values.
//!
//! The bootstrap resamples each `(x, y)` block as a multinomial with its
//! observed size: settings are treated as fixed by design, as they are in a
//! randomized-settings protocol. [`naive_t_test`] is the aggregated one-sample
//! t-test, exposed only so it can be reported next to the resampling results.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::behavior::{correlation_matrix, normalize_counts, Outcome, OutcomeCountTable, SETTING_PAIRS};
use crate::chsh::{chsh_value, SignConvention};
use crate::rng::{multinomial, replicate_rng};
use crate::special::student_t_two_sided_p;
use crate::{Error, Result};

/// Smallest bootstrap size accepted by [`bootstrap_ci_chsh`].
pub const MIN_RESAMPLES: usize = 100;

/// One trial of a two-party experiment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialRecord {
    pub participant_id: String,
    pub x: usize,
    pub y: usize,
    pub a: Outcome,
    pub b: Outcome,
}

impl TrialRecord {
    pub fn new(participant_id: impl Into<String>, x: usize, y: usize, a: Outcome, b: Outcome) -> Result<Self> {
        for (what, s) in [("setting x", x), ("setting y", y)] {
            if s > 1 {
                return Err(Error::IndexOutOfRange { what, index: s });
            }
        }
        Ok(Self { participant_id: participant_id.into(), x, y, a, b })
    }
}

/// Pools trials into a count table.
pub fn counts_from_trials(trials: &[TrialRecord]) -> OutcomeCountTable {
    let mut counts = OutcomeCountTable::new();
    for t in trials {
        counts.add(t.x, t.y, t.a, t.b, 1).expect("settings validated at construction");
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum IntervalMethod {
    BootstrapPercentile,
    PermutationNull,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct IntervalEstimate {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub method: IntervalMethod,
}

impl IntervalEstimate {
    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

fn s_of_counts(counts: &OutcomeCountTable, convention: SignConvention) -> Option<f64> {
    normalize_counts(counts).ok().map(|b| chsh_value(&correlation_matrix(&b), convention))
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Percentile bootstrap interval for `S` under one convention.
///
/// Replicate `i` draws each block from `replicate_rng(seed, i)`. The reported
/// interval is widened, if necessary, to contain the observed point.
pub fn bootstrap_ci_chsh(
    counts: &OutcomeCountTable,
    convention: SignConvention,
    n_resamples: usize,
    seed: u64,
    level: f64,
) -> Result<IntervalEstimate> {
    if let Some((x, y)) = counts.first_empty_block() {
        return Err(Error::EmptyBlock { x, y });
    }
    if n_resamples < MIN_RESAMPLES {
        return Err(Error::InvalidArgument(format!("n_resamples = {n_resamples}, need at least {MIN_RESAMPLES}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!("level {level} outside (0, 1)")));
    }
    let behavior = normalize_counts(counts)?;
    let point = chsh_value(&correlation_matrix(&behavior), convention);

    let mut replicates = Vec::with_capacity(n_resamples);
    let mut undefined = 0;
    for i in 0..n_resamples {
        let mut rng = replicate_rng(seed, i as u64);
        let mut blocks = [[[0u64; 4]; 2]; 2];
        for &(x, y) in &SETTING_PAIRS {
            let draw = multinomial(&mut rng, counts.block_total(x, y), &behavior.block(x, y));
            blocks[x][y].copy_from_slice(&draw);
        }
        match s_of_counts(&OutcomeCountTable::from_blocks(blocks), convention) {
            Some(s) => replicates.push(s),
            None => undefined += 1,
        }
    }
    if 2 * undefined > n_resamples {
        return Err(Error::DegenerateResamples { undefined, total: n_resamples });
    }
    replicates.sort_by(f64::total_cmp);
    let alpha = 1.0 - level;
    let lower = quantile_sorted(&replicates, alpha / 2.0).min(point);
    let upper = quantile_sorted(&replicates, 1.0 - alpha / 2.0).max(point);
    Ok(IntervalEstimate { point, lower, upper, level, method: IntervalMethod::BootstrapPercentile })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ParticipantChsh {
    pub participant_id: String,
    pub s: f64,
    /// Trials per block, indexed `[x][y]`.
    pub trials_per_block: [[u64; 2]; 2],
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExcludedParticipant {
    pub participant_id: String,
    pub missing_blocks: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ParticipantChshSummary {
    pub included: Vec<ParticipantChsh>,
    pub excluded: Vec<ExcludedParticipant>,
}

impl ParticipantChshSummary {
    pub fn values(&self) -> Vec<f64> {
        self.included.iter().map(|p| p.s).collect()
    }
}

/// Per-participant `S` from each participant's own empirical correlators,
/// ordered by participant id. Participants missing a block are listed as
/// excluded.
pub fn participant_level_chsh(trials: &[TrialRecord], convention: SignConvention) -> Result<ParticipantChshSummary> {
    let mut groups: BTreeMap<&str, OutcomeCountTable> = BTreeMap::new();
    for t in trials {
        groups
            .entry(t.participant_id.as_str())
            .or_default()
            .add(t.x, t.y, t.a, t.b, 1)
            .expect("settings validated at construction");
    }
    let mut summary = ParticipantChshSummary { included: Vec::new(), excluded: Vec::new() };
    for (id, counts) in groups {
        let missing: Vec<(usize, usize)> =
            SETTING_PAIRS.iter().copied().filter(|&(x, y)| counts.block_total(x, y) == 0).collect();
        if missing.is_empty() {
            let s = s_of_counts(&counts, convention).expect("all blocks observed");
            let mut per_block = [[0u64; 2]; 2];
            for &(x, y) in &SETTING_PAIRS {
                per_block[x][y] = counts.block_total(x, y);
            }
            summary.included.push(ParticipantChsh { participant_id: id.into(), s, trials_per_block: per_block });
        } else {
            summary.excluded.push(ExcludedParticipant { participant_id: id.into(), missing_blocks: missing });
        }
    }
    if summary.included.is_empty() {
        return Err(Error::NoEligibleParticipants);
    }
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TTest {
    pub t: f64,
    pub p_two_sided: f64,
    pub df: u64,
}

/// One-sample t-test of the mean against `null_value`.
pub fn naive_t_test(samples: &[f64], null_value: f64) -> Result<TTest> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::TooFewSamples { got: n, min: 2 });
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);
    // Relative guard: a "constant" sample of non-representable decimals still
    // carries rounding noise.
    let scale = samples.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    if !(var > (1e-14 * scale) * (1e-14 * scale)) {
        return Err(Error::ZeroVariance);
    }
    let t = (mean - null_value) / libm::sqrt(var / nf);
    let df = (n - 1) as u64;
    Ok(TTest { t, p_two_sided: student_t_two_sided_p(t, df as f64), df })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PermutationTest {
    pub observed_s: f64,
    pub p: f64,
    pub n_permutations: usize,
}

/// Permutation test of "no setting dependence".
///
/// Each permutation reassigns the pooled `(a, b)` outcome pairs to the fixed
/// list of `(x, y)` labels, so block sizes and outcome margins are preserved.
/// `p = (1 + #{|S_perm| ≥ |S_obs|}) / (n_permutations + 1)`.
pub fn permutation_test_chsh(
    trials: &[TrialRecord],
    convention: SignConvention,
    n_permutations: usize,
    seed: u64,
) -> Result<PermutationTest> {
    let counts = counts_from_trials(trials);
    if let Some((x, y)) = counts.first_empty_block() {
        return Err(Error::EmptyBlock { x, y });
    }
    let observed_s = s_of_counts(&counts, convention).expect("all blocks observed");
    let observed_abs = observed_s.abs();
    // Absorbs rounding differences between equal tables reached in different orders.
    let slack = 1e-12;

    let mut pairs: Vec<(Outcome, Outcome)> = trials.iter().map(|t| (t.a, t.b)).collect();
    let mut extreme = 0usize;
    for i in 0..n_permutations {
        let mut rng = replicate_rng(seed, i as u64);
        // Always shuffle from the original order so replicate i is schedule-independent.
        pairs.clear();
        pairs.extend(trials.iter().map(|t| (t.a, t.b)));
        pairs.shuffle(&mut rng);
        let mut permuted = OutcomeCountTable::new();
        for (t, &(a, b)) in trials.iter().zip(&pairs) {
            permuted.add(t.x, t.y, a, b, 1).expect("settings validated at construction");
        }
        let s = s_of_counts(&permuted, convention).expect("block sizes preserved");
        if s.abs() >= observed_abs - slack {
            extreme += 1;
        }
    }
    let p = (1 + extreme) as f64 / (n_permutations + 1) as f64;
    Ok(PermutationTest { observed_s, p, n_permutations })
}
