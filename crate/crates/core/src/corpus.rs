//! Tokenization and rank-table construction.
//!
//! Every step is configured explicitly and echoed by [`PreprocessConfig`] so a
//! report states exactly what was done. Lemmatization is not performed.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::rankfit::RankTable;
use crate::rng::seeded_rng;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PreprocessConfig {
    pub case_fold: bool,
    pub strip_punctuation: bool,
    pub stopwords: Option<BTreeSet<String>>,
    pub min_token_length: usize,
    /// Always `false`; recorded so reports never imply lemmatization happened.
    pub lemmatization: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self { case_fold: false, strip_punctuation: false, stopwords: None, min_token_length: 1, lemmatization: false }
    }
}

/// Whitespace tokenization with optional case folding, edge-punctuation
/// stripping, stopword removal and a minimum length in characters.
pub fn tokenize(text: &str, config: &PreprocessConfig) -> Vec<String> {
    let min_len = config.min_token_length.max(1);
    text.split_whitespace()
        .filter_map(|raw| {
            let trimmed = if config.strip_punctuation { raw.trim_matches(|c: char| !c.is_alphanumeric()) } else { raw };
            let token = if config.case_fold { trimmed.to_lowercase() } else { String::from(trimmed) };
            if token.chars().count() < min_len {
                return None;
            }
            if config.stopwords.as_ref().is_some_and(|s| s.contains(&token)) {
                return None;
            }
            Some(token)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TokenRank {
    pub token: String,
    pub rank: u64,
    pub count: u64,
}

/// A rank table plus the token ↔ rank mapping behind it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedCorpus {
    pub table: RankTable,
    /// One row per distinct token, in rank order.
    pub tokens: Vec<TokenRank>,
}

impl RankedCorpus {
    pub fn rank_of(&self, token: &str) -> Option<u64> {
        self.tokens.iter().find(|t| t.token == token).map(|t| t.rank)
    }

    fn rank_map(&self) -> BTreeMap<&str, u64> {
        self.tokens.iter().map(|t| (t.token.as_str(), t.rank)).collect()
    }
}

/// Ranks `(token, count)` pairs by descending count, ties by token order.
/// Pairs with the same token are summed.
pub fn rank_token_counts<S: AsRef<str>>(pairs: impl IntoIterator<Item = (S, u64)>) -> RankedCorpus {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for (token, n) in pairs {
        *counts.entry(String::from(token.as_ref())).or_default() += n;
    }
    let mut sorted: Vec<(String, u64)> = counts.into_iter().filter(|&(_, n)| n > 0).collect();
    // BTreeMap iteration is already lexicographic; a stable sort keeps that order for ties.
    sorted.sort_by_key(|&(_, n)| core::cmp::Reverse(n));
    let tokens: Vec<TokenRank> = sorted
        .into_iter()
        .enumerate()
        .map(|(i, (token, count))| TokenRank { token, rank: i as u64 + 1, count })
        .collect();
    let table =
        RankTable::new(tokens.iter().map(|t| (t.rank, t.count)).collect(), None).expect("ranks are consecutive");
    RankedCorpus { table, tokens }
}

/// Counts tokens and assigns ranks by descending count, ties lexicographic.
pub fn build_rank_table<S: AsRef<str>>(tokens: &[S]) -> RankedCorpus {
    rank_token_counts(tokens.iter().map(|t| (t.as_ref(), 1u64)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoldoutSplit {
    pub train: RankedCorpus,
    /// Held-out counts at the training ranks, over the training support.
    pub test: RankTable,
    /// Held-out occurrences of tokens never seen in training.
    pub oov_count: u64,
}

/// Assigns each occurrence to the test side independently with probability
/// `test_fraction`, using one generator seeded by `seed` in token order.
pub fn split_holdout<S: AsRef<str>>(tokens: &[S], test_fraction: f64, seed: u64) -> Result<HoldoutSplit> {
    if tokens.len() < 2 {
        return Err(Error::InvalidArgument(alloc::format!(
            "holdout split needs at least 2 tokens, got {}",
            tokens.len()
        )));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(alloc::format!("test_fraction {test_fraction} outside (0, 1)")));
    }
    let mut rng = seeded_rng(seed);
    let mut train_tokens: Vec<&str> = Vec::new();
    let mut test_tokens: Vec<&str> = Vec::new();
    for t in tokens {
        if rng.random::<f64>() < test_fraction {
            test_tokens.push(t.as_ref());
        } else {
            train_tokens.push(t.as_ref());
        }
    }
    if train_tokens.is_empty() {
        return Err(Error::DegenerateSplit);
    }
    let train = build_rank_table(&train_tokens);
    let ranks = train.rank_map();
    let mut test_counts: BTreeMap<u64, u64> = BTreeMap::new();
    let mut oov_count = 0;
    for t in test_tokens {
        match ranks.get(t) {
            Some(&r) => *test_counts.entry(r).or_default() += 1,
            None => oov_count += 1,
        }
    }
    let test = RankTable::new(test_counts.into_iter().collect(), Some(train.table.support()))
        .expect("training ranks are valid");
    Ok(HoldoutSplit { train, test, oov_count })
}
