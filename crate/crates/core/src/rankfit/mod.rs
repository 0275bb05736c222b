//! Rank–frequency model fitting under discrete (multinomial) likelihoods.

use alloc::format;
use alloc::vec::Vec;

use crate::rng::{multinomial, seeded_rng};
use crate::{Error, Result};

mod family;
mod fit;
mod regime;
mod spacing;

pub use family::{loglik, pmf, pmf_vector, Family, FamilySpec};
pub use fit::{fit_mle, holdout_loglik, model_select, FitConfig, FitResult, ModelSelection, OptimizerTrace};
pub use regime::{
    be_occupancy, be_small_i_approx, be_tail_approx, zipf_regime_report, RegimeReport, TAIL_ONSET,
    ZIPF_WINDOW_MIN_SPAN, ZIPF_WINDOW_THRESHOLD,
};
pub use spacing::{spacing_exponent, SpacingFit};

/// Sorted `(rank, count)` pairs over a support `1..=V`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RankTable {
    entries: Vec<(u64, u64)>,
    support: u64,
    total: u64,
}

impl RankTable {
    /// Ranks must be ≥ 1 and strictly increasing. `support` defaults to the
    /// largest rank present.
    pub fn new(entries: Vec<(u64, u64)>, support: Option<u64>) -> Result<Self> {
        let mut prev = 0u64;
        for &(rank, _) in &entries {
            if rank <= prev {
                return Err(Error::InvalidRankTable(format!(
                    "ranks must be >= 1 and strictly increasing (saw {rank} after {prev})"
                )));
            }
            prev = rank;
        }
        let max_rank = prev;
        let support = support.unwrap_or(max_rank);
        if support < max_rank {
            return Err(Error::InvalidRankTable(format!("support {support} below max rank {max_rank}")));
        }
        let total = entries.iter().map(|&(_, n)| n).sum();
        Ok(Self { entries, support, total })
    }

    /// Table from counts listed for ranks `1, 2, …`.
    pub fn from_counts(counts: &[u64]) -> Self {
        let entries = counts.iter().enumerate().map(|(i, &n)| (i as u64 + 1, n)).collect();
        Self::new(entries, None).expect("consecutive ranks")
    }

    pub fn entries(&self) -> &[(u64, u64)] {
        &self.entries
    }

    pub fn support(&self) -> u64 {
        self.support
    }

    /// Total count `N`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn max_rank(&self) -> u64 {
        self.entries.last().map_or(0, |&(r, _)| r)
    }

    /// Number of ranks with a positive count.
    pub fn observed_ranks(&self) -> usize {
        self.entries.iter().filter(|&&(_, n)| n > 0).count()
    }

    /// Same entries over a larger support.
    pub fn with_support(mut self, support: u64) -> Result<Self> {
        if support < self.max_rank() {
            return Err(Error::InvalidRankTable(format!("support {support} below max rank {}", self.max_rank())));
        }
        self.support = support;
        Ok(self)
    }

    /// Multiplies every count by `factor`.
    pub fn scaled(&self, factor: u64) -> Self {
        let entries = self.entries.iter().map(|&(r, n)| (r, n * factor)).collect();
        Self::new(entries, Some(self.support)).expect("ranks unchanged")
    }
}

/// Draws `n` observations from `spec` as a multinomial over its support,
/// keeping the true ranks. Zero-count ranks are omitted.
pub fn sample_rank_table(spec: &FamilySpec, n: u64, seed: u64) -> Result<RankTable> {
    let probs = pmf_vector(spec)?;
    let mut rng = seeded_rng(seed);
    let counts = multinomial(&mut rng, n, &probs);
    let entries = counts.into_iter().enumerate().filter(|&(_, c)| c > 0).map(|(i, c)| (i as u64 + 1, c)).collect();
    RankTable::new(entries, Some(spec.support))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn table_invariants() {
        let t = RankTable::new(vec![(1, 5), (3, 2), (4, 0)], Some(10)).unwrap();
        assert_eq!(t.total(), 7);
        assert_eq!(t.support(), 10);
        assert_eq!(t.max_rank(), 4);
        assert_eq!(t.observed_ranks(), 2);
        assert!(RankTable::new(vec![(2, 1), (2, 1)], None).is_err());
        assert!(RankTable::new(vec![(0, 1)], None).is_err());
        assert!(RankTable::new(vec![(5, 1)], Some(4)).is_err());
        let empty = RankTable::new(vec![], None).unwrap();
        assert_eq!((empty.total(), empty.support()), (0, 0));
        assert_eq!(RankTable::from_counts(&[3, 1]).entries(), &[(1, 3), (2, 1)]);
        assert_eq!(t.scaled(3).total(), 21);
    }

    #[test]
    fn sampling_is_seeded() {
        let spec = FamilySpec::new(Family::Zipf, &[1.0], 100).unwrap();
        let a = sample_rank_table(&spec, 5000, 4).unwrap();
        assert_eq!(a, sample_rank_table(&spec, 5000, 4).unwrap());
        assert_eq!(a.total(), 5000);
        assert_eq!(a.support(), 100);
    }
}
