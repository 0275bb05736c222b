//! Regime diagnostics for the BE-rank occupancy `N(i) = 1/(A·e^{i/B} − 1)`.
//!
//! For `i ≪ B` the occupancy is close to `1/((A − 1) + (A/B)·i)`, a
//! Zipf–Mandelbrot shape; once `A·e^{i/B} ≫ 1` it is close to the exponential
//! tail `e^{−i/B}/A`. [`zipf_regime_report`] measures how well each
//! approximation holds over a rank window and where the curve is
//! indistinguishable from `const/i`.

use alloc::collections::VecDeque;
use alloc::format;

use super::family::{Family, FamilySpec};
use crate::{Error, Result};

/// Relative tolerance for matching `const/i`.
pub const ZIPF_WINDOW_THRESHOLD: f64 = 0.05;
/// A Zipf window must span at least this rank ratio `hi/lo` (one decade).
pub const ZIPF_WINDOW_MIN_SPAN: f64 = 10.0;
/// Ranks with `A·e^{i/B} ≥ TAIL_ONSET` count as the exponential tail.
pub const TAIL_ONSET: f64 = 100.0;

fn check(a: f64, b: f64, i: u64) -> Result<()> {
    let err = |reason| Err(Error::ParamOutOfDomain { family: Family::BeRank.name(), reason });
    if !(b > 0.0) || !b.is_finite() || !a.is_finite() {
        return err(format!("B = {b} must be positive and A = {a} finite"));
    }
    if !(a > libm::exp(-1.0 / b)) {
        return err(format!("A = {a} must exceed exp(-1/B)"));
    }
    if i == 0 {
        return err("ranks start at 1".into());
    }
    Ok(())
}

fn occupancy_unchecked(a: f64, b: f64, i: f64) -> f64 {
    let delta = a - libm::exp(-1.0 / b);
    1.0 / (libm::expm1((i - 1.0) / b) + delta * libm::exp(i / b))
}

/// Exact unnormalized BE-rank occupancy.
pub fn be_occupancy(a: f64, b: f64, i: u64) -> Result<f64> {
    check(a, b, i)?;
    Ok(occupancy_unchecked(a, b, i as f64))
}

/// Small-`i/B` approximant `1/((A − 1) + (A/B)·i)`.
pub fn be_small_i_approx(a: f64, b: f64, i: u64) -> Result<f64> {
    check(a, b, i)?;
    Ok(1.0 / ((a - 1.0) + (a / b) * i as f64))
}

/// Exponential-tail approximant `e^{−i/B}/A`.
pub fn be_tail_approx(a: f64, b: f64, i: u64) -> Result<f64> {
    check(a, b, i)?;
    Ok(libm::exp(-(i as f64) / b) / a)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RegimeReport {
    pub observed_ranks: (u64, u64),
    /// `i/B` at the largest observed rank.
    pub i_over_b_max: f64,
    pub a_minus_1: f64,
    /// Max of `|approx/exact − 1|` for the small-`i/B` form over the observed ranks.
    pub small_i_max_rel_err: f64,
    /// Ranks of the observed window with `A·e^{i/B} ≥ TAIL_ONSET`, if any.
    pub tail_ranks: Option<(u64, u64)>,
    /// Max relative error of the exponential-tail form over `tail_ranks`.
    pub tail_max_rel_err: Option<f64>,
    /// Widest window spanning at least a decade where the exact occupancy
    /// matches `const/i` within [`ZIPF_WINDOW_THRESHOLD`].
    pub zipf_window: Option<(u64, u64)>,
    pub zipf_threshold: f64,
}

/// Regime diagnostics of a BE-rank spec over the ranks `lo..=hi`.
pub fn zipf_regime_report(spec: &FamilySpec, lo: u64, hi: u64) -> Result<RegimeReport> {
    if spec.family != Family::BeRank {
        return Err(Error::InvalidArgument(format!("regime report needs BE_RANK, got {}", spec.family)));
    }
    let (a, b) = (spec.params[0], spec.params[1]);
    check(a, b, lo.max(1))?;
    if lo == 0 || hi < lo {
        return Err(Error::InvalidArgument(format!("invalid rank window {lo}..={hi}")));
    }

    let mut small_err = 0.0f64;
    let mut tail_lo = None;
    let mut tail_err = 0.0f64;
    for i in lo..=hi {
        let fi = i as f64;
        let exact = occupancy_unchecked(a, b, fi);
        let small = 1.0 / ((a - 1.0) + (a / b) * fi);
        small_err = small_err.max((small / exact - 1.0).abs());
        if a * libm::exp(fi / b) >= TAIL_ONSET {
            tail_lo.get_or_insert(i);
            let tail = libm::exp(-fi / b) / a;
            tail_err = tail_err.max((tail / exact - 1.0).abs());
        }
    }
    let tail_ranks = tail_lo.map(|t| (t, hi));

    Ok(RegimeReport {
        observed_ranks: (lo, hi),
        i_over_b_max: hi as f64 / b,
        a_minus_1: a - 1.0,
        small_i_max_rel_err: small_err,
        tail_ranks,
        tail_max_rel_err: tail_ranks.map(|_| tail_err),
        zipf_window: zipf_window(a, b, lo, hi),
        zipf_threshold: ZIPF_WINDOW_THRESHOLD,
    })
}

/// A constant `c` with `|g(i)/c − 1| ≤ θ` on a window exists iff
/// `max g / min g ≤ (1 + θ)/(1 − θ)` there, where `g(i) = i·N(i)`. Valid
/// windows are closed under shrinking, so a two-pointer sweep with monotone
/// deques finds, for every right end, the smallest valid left end.
fn zipf_window(a: f64, b: f64, lo: u64, hi: u64) -> Option<(u64, u64)> {
    let ratio_limit = (1.0 + ZIPF_WINDOW_THRESHOLD) / (1.0 - ZIPF_WINDOW_THRESHOLD);
    let g = |i: u64| i as f64 * occupancy_unchecked(a, b, i as f64);
    let mut max_q: VecDeque<(u64, f64)> = VecDeque::new();
    let mut min_q: VecDeque<(u64, f64)> = VecDeque::new();
    let mut left = lo;
    let mut best: Option<(u64, u64)> = None;
    for right in lo..=hi {
        let v = g(right);
        while max_q.back().is_some_and(|&(_, m)| m <= v) {
            max_q.pop_back();
        }
        max_q.push_back((right, v));
        while min_q.back().is_some_and(|&(_, m)| m >= v) {
            min_q.pop_back();
        }
        min_q.push_back((right, v));
        while max_q.front().unwrap().1 > ratio_limit * min_q.front().unwrap().1 {
            left += 1;
            while max_q.front().is_some_and(|&(j, _)| j < left) {
                max_q.pop_front();
            }
            while min_q.front().is_some_and(|&(j, _)| j < left) {
                min_q.pop_front();
            }
        }
        if right as f64 >= ZIPF_WINDOW_MIN_SPAN * left as f64 && best.is_none_or(|(l, r)| right - left > r - l) {
            best = Some((left, right));
        }
    }
    best
}
