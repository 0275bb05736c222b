//! Analysis engines for bipartite CHSH experiments and rank–frequency data.
//!
//! The crate is `no_std` (it needs `alloc`) and every operation is a pure
//! function of its inputs and, where randomness is involved, an explicit
//! `u64` seed. File formats, reports and the command line live in the
//! `bellrank` companion crate.
//!
//! Modules, bottom-up:
//!
//! - [`behavior`]: outcome counts, conditional behaviors `P(a,b|x,y)`,
//!   correlators and the nonsignalling / factorization /
//!   measurement-independence residuals.
//! - [`chsh`]: the eight CHSH functionals, classification against the
//!   local (2), Tsirelson (2√2) and algebraic (4) bounds, and local-model
//!   decomposition over the 16 deterministic strategies.
//! - [`inference`]: block bootstrap intervals, participant-level values,
//!   a permutation test, and the one-sample t-test kept for comparison.
//! - [`simulators`]: PR box, singlet and local behaviors, noise mixing,
//!   multinomial trial sampling, and a randomized-settings protocol harness.
//! - [`rankfit`]: discrete-likelihood fits of rank–frequency families,
//!   AIC/BIC selection, BE-rank regime diagnostics and the spacing exponent.
//! - [`corpus`]: tokenization and rank-table construction.
//!
//! ```
//! use bellrank_core::behavior::correlation_matrix;
//! use bellrank_core::chsh::{chsh_report, Classification};
//! use bellrank_core::simulators::pr_box_behavior;
//!
//! let report = chsh_report(&correlation_matrix(&pr_box_behavior()));
//! assert_eq!(report.s_max_abs, 4.0);
//! assert_eq!(report.classification, Classification::SupraQuantum);
//! ```

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` guards deliberately reject NaN; cell loops index parallel arrays.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod behavior;
pub mod chsh;
pub mod corpus;
mod error;
pub mod inference;
mod lp;
pub mod optim;
pub mod rankfit;
pub mod rng;
pub mod simulators;
pub mod special;

pub use error::{Error, Result};
