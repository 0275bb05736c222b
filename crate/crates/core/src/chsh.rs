//! CHSH functionals, bound classification and local-model membership.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::behavior::{
    correlation_matrix, nonsignalling_residual, BehaviorTable, CorrelationMatrix, Outcome, CELLS, SETTING_PAIRS,
};
use crate::lp::{self, LpOutcome};
use crate::{Error, Result};

/// Local-hidden-variable bound.
pub const LOCAL_BOUND: f64 = 2.0;
/// Tsirelson's bound, 2√2.
pub const TSIRELSON_BOUND: f64 = 2.0 * core::f64::consts::SQRT_2;
/// Algebraic maximum of any CHSH functional.
pub const ALGEBRAIC_BOUND: f64 = 4.0;
/// Slack applied at every classification threshold.
pub const CLASSIFICATION_TOLERANCE: f64 = 1e-9;

/// Signs applied to `(E00, E01, E10, E11)`; exactly one or three are negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignConvention {
    signs: [i8; 4],
}

impl SignConvention {
    /// `E00 + E01 + E10 − E11`.
    pub const STANDARD: SignConvention = SignConvention { signs: [1, 1, 1, -1] };

    /// All eight valid placements, single-minus forms first.
    pub const ALL: [SignConvention; 8] = [
        SignConvention { signs: [1, 1, 1, -1] },
        SignConvention { signs: [1, 1, -1, 1] },
        SignConvention { signs: [1, -1, 1, 1] },
        SignConvention { signs: [-1, 1, 1, 1] },
        SignConvention { signs: [-1, -1, -1, 1] },
        SignConvention { signs: [-1, -1, 1, -1] },
        SignConvention { signs: [-1, 1, -1, -1] },
        SignConvention { signs: [1, -1, -1, -1] },
    ];

    pub fn new(signs: [i8; 4]) -> Option<Self> {
        let valid = signs.iter().all(|s| *s == 1 || *s == -1);
        let minus = signs.iter().filter(|s| **s == -1).count();
        (valid && (minus == 1 || minus == 3)).then_some(Self { signs })
    }

    /// Parses a four-character string such as `"+++-"`.
    pub fn parse(s: &str) -> Option<Self> {
        let mut signs = [0i8; 4];
        let mut chars = s.chars();
        for slot in signs.iter_mut() {
            *slot = match chars.next()? {
                '+' => 1,
                '-' => -1,
                _ => return None,
            };
        }
        if chars.next().is_some() {
            return None;
        }
        Self::new(signs)
    }

    pub fn signs(&self) -> [i8; 4] {
        self.signs
    }
}

impl fmt::Display for SignConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.signs {
            f.write_str(if s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for SignConvention {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// `S = Σ_k signs[k] · e[x_k][y_k]` with `(x_k, y_k)` in the order 00, 01, 10, 11.
pub fn chsh_value(corr: &CorrelationMatrix, conv: SignConvention) -> f64 {
    SETTING_PAIRS.iter().zip(conv.signs).map(|(&(x, y), s)| f64::from(s) * corr.get(x, y)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum Classification {
    Local,
    QuantumCompatible,
    SupraQuantum,
    Invalid,
}

/// Classifies `|S|`; values within the tolerance of a bound fall in the smaller region.
pub fn classify(s_abs: f64) -> Classification {
    if s_abs <= LOCAL_BOUND + CLASSIFICATION_TOLERANCE {
        Classification::Local
    } else if s_abs <= TSIRELSON_BOUND + CLASSIFICATION_TOLERANCE {
        Classification::QuantumCompatible
    } else if s_abs <= ALGEBRAIC_BOUND + CLASSIFICATION_TOLERANCE {
        Classification::SupraQuantum
    } else {
        Classification::Invalid
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Bounds {
    pub local: f64,
    pub tsirelson: f64,
    pub algebraic: f64,
}

pub const BOUNDS: Bounds = Bounds { local: LOCAL_BOUND, tsirelson: TSIRELSON_BOUND, algebraic: ALGEBRAIC_BOUND };

#[derive(Debug, Clone, PartialEq)]
pub struct ChshReport {
    /// `S` under each convention, in [`SignConvention::ALL`] order.
    pub s_by_convention: [(SignConvention, f64); 8],
    pub s_max_abs: f64,
    pub classification: Classification,
    pub bounds: Bounds,
}

impl ChshReport {
    pub fn value(&self, conv: SignConvention) -> f64 {
        self.s_by_convention
            .iter()
            .find(|(c, _)| *c == conv)
            .map(|(_, s)| *s)
            .expect("every valid convention is evaluated")
    }

    /// The convention attaining `s_max_abs` (first in canonical order on ties).
    pub fn max_convention(&self) -> (SignConvention, f64) {
        let mut best = self.s_by_convention[0];
        for &(c, s) in &self.s_by_convention[1..] {
            if s.abs() > best.1.abs() {
                best = (c, s);
            }
        }
        best
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for ChshReport {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        use serde::ser::{SerializeMap, SerializeStruct};

        struct ByConvention<'a>(&'a [(SignConvention, f64); 8]);
        impl serde::Serialize for ByConvention<'_> {
            fn serialize<S: serde::Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
                let mut map = serializer.serialize_map(Some(8))?;
                for (c, s) in self.0 {
                    map.serialize_entry(&alloc::format!("{c}"), s)?;
                }
                map.end()
            }
        }

        let mut st = serializer.serialize_struct("ChshReport", 4)?;
        st.serialize_field("s_by_convention", &ByConvention(&self.s_by_convention))?;
        st.serialize_field("s_max_abs", &self.s_max_abs)?;
        st.serialize_field("classification", &self.classification)?;
        st.serialize_field("bounds", &self.bounds)?;
        st.end()
    }
}

pub fn chsh_report(corr: &CorrelationMatrix) -> ChshReport {
    let s_by_convention = SignConvention::ALL.map(|c| (c, chsh_value(corr, c)));
    let s_max_abs = s_by_convention.iter().fold(0.0f64, |m, (_, s)| m.max(s.abs()));
    ChshReport { s_by_convention, s_max_abs, classification: classify(s_max_abs), bounds: BOUNDS }
}

/// Number of deterministic local strategies for two settings and two outcomes per party.
pub const STRATEGY_COUNT: usize = 16;

/// A deterministic local strategy: fixed responses `a(x)` and `b(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeterministicStrategy {
    pub alice: [Outcome; 2],
    pub bob: [Outcome; 2],
}

impl DeterministicStrategy {
    /// Decodes `k` as the bits of `(a(0), a(1), b(0), b(1))`, most significant first,
    /// with bit 0 meaning `+1`.
    pub fn from_index(k: usize) -> Result<Self> {
        if k >= STRATEGY_COUNT {
            return Err(Error::IndexOutOfRange { what: "strategy", index: k });
        }
        let bit = |shift: usize| if (k >> shift) & 1 == 0 { Outcome::Plus } else { Outcome::Minus };
        Ok(Self { alice: [bit(3), bit(2)], bob: [bit(1), bit(0)] })
    }

    pub fn index(&self) -> usize {
        (self.alice[0].bit() << 3) | (self.alice[1].bit() << 2) | (self.bob[0].bit() << 1) | self.bob[1].bit()
    }

    pub fn behavior(&self) -> BehaviorTable {
        let mut probs = [[[0.0; 4]; 2]; 2];
        for &(x, y) in &SETTING_PAIRS {
            probs[x][y][crate::behavior::cell_index(self.alice[x], self.bob[y])] = 1.0;
        }
        BehaviorTable::from_blocks(probs).expect("point masses are normalized")
    }
}

pub fn deterministic_strategy_behavior(k: usize) -> Result<BehaviorTable> {
    Ok(DeterministicStrategy::from_index(k)?.behavior())
}

/// Convex weights over the 16 deterministic strategies reproducing a behavior.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LocalDecomposition {
    pub weights: [f64; STRATEGY_COUNT],
    /// Max-norm reconstruction error over the 16 probability cells.
    pub residual: f64,
}

impl LocalDecomposition {
    pub fn reconstruct(&self) -> BehaviorTable {
        let vertices: Vec<BehaviorTable> =
            (0..STRATEGY_COUNT).map(|k| deterministic_strategy_behavior(k).expect("k < 16")).collect();
        BehaviorTable::mixture(self.weights.iter().copied().zip(vertices.iter()))
    }
}

/// The CHSH functional that rules out a local model: `value > 2` under `convention`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ChshCertificate {
    pub convention: SignConvention,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "status", rename_all = "snake_case"))]
pub enum LocalModel {
    Feasible(LocalDecomposition),
    Infeasible(ChshCertificate),
}

impl LocalModel {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LocalModel::Feasible(_))
    }
}

/// Searches for a mixture of deterministic strategies within `tolerance` of the
/// behavior (max-norm over cells).
///
/// Solved as the linear program `min t` subject to `|Σ_k w_k D_k(c) − P(c)| ≤ t`
/// for every cell `c`, `Σ w_k = 1`, `w ≥ 0`.
pub fn local_model_decompose(behavior: &BehaviorTable, tolerance: f64) -> Result<LocalModel> {
    if !(tolerance >= 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("tolerance {tolerance} must be >= 0")));
    }
    let residual = nonsignalling_residual(behavior);
    if residual > tolerance {
        return Err(Error::SignallingInput { residual, tolerance });
    }

    let vertices: Vec<BehaviorTable> =
        (0..STRATEGY_COUNT).map(|k| deterministic_strategy_behavior(k).expect("k < 16")).collect();
    // Columns: w_0..w_15, t, 16 upper slacks, 16 lower slacks.
    let t_col = STRATEGY_COUNT;
    let ncols = STRATEGY_COUNT + 1 + 32;
    let mut a = Vec::with_capacity(33);
    let mut b = Vec::with_capacity(33);
    let mut row_index = 0;
    for &(x, y) in &SETTING_PAIRS {
        for &(oa, ob) in &CELLS {
            let p = behavior.prob(x, y, oa, ob);
            let mut upper = alloc::vec![0.0; ncols];
            let mut lower = alloc::vec![0.0; ncols];
            for (k, v) in vertices.iter().enumerate() {
                let d = v.prob(x, y, oa, ob);
                upper[k] = d;
                lower[k] = -d;
            }
            upper[t_col] = -1.0;
            lower[t_col] = -1.0;
            upper[t_col + 1 + row_index] = 1.0;
            lower[t_col + 1 + 16 + row_index] = 1.0;
            a.push(upper);
            b.push(p);
            a.push(lower);
            b.push(-p);
            row_index += 1;
        }
    }
    let mut sum_row = alloc::vec![0.0; ncols];
    for v in sum_row.iter_mut().take(STRATEGY_COUNT) {
        *v = 1.0;
    }
    a.push(sum_row);
    b.push(1.0);
    let mut cost = alloc::vec![0.0; ncols];
    cost[t_col] = 1.0;

    let certificate = || {
        // Conventions come in ± pairs; report the one with the largest signed value.
        let report = chsh_report(&correlation_matrix(behavior));
        let (convention, value) = report
            .s_by_convention
            .iter()
            .copied()
            .fold(report.s_by_convention[0], |best, cur| if cur.1 > best.1 { cur } else { best });
        LocalModel::Infeasible(ChshCertificate { convention, value })
    };

    let LpOutcome::Optimal { x, .. } = lp::solve(&a, &b, &cost) else {
        return Ok(certificate());
    };
    let mut weights = [0.0; STRATEGY_COUNT];
    weights.copy_from_slice(&x[..STRATEGY_COUNT]);
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    let mut decomposition = LocalDecomposition { weights, residual: 0.0 };
    decomposition.residual = decomposition.reconstruct().max_abs_diff(behavior);
    if decomposition.residual <= tolerance {
        Ok(LocalModel::Feasible(decomposition))
    } else {
        Ok(certificate())
    }
}

/// Renders a convention list such as `"+++-,--+-"`.
pub fn format_conventions(conventions: &[SignConvention]) -> String {
    let mut out = String::new();
    for (i, c) in conventions.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&alloc::format!("{c}"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::correlator;
    use crate::simulators::{pr_box_behavior, singlet_behavior, SingletAngles};
    use core::f64::consts::PI;

    fn matrix(e: [[f64; 2]; 2]) -> CorrelationMatrix {
        CorrelationMatrix::new(e).unwrap()
    }

    #[test]
    fn convention_set() {
        assert_eq!(SignConvention::parse("+++-"), Some(SignConvention::STANDARD));
        assert_eq!(SignConvention::parse("++++"), None);
        assert_eq!(SignConvention::parse("+-+-"), None);
        assert_eq!(SignConvention::parse("+++-+"), None);
        assert_eq!(SignConvention::parse("+++x"), None);
        for c in SignConvention::ALL {
            assert_eq!(SignConvention::parse(&alloc::format!("{c}")), Some(c));
        }
        let mut all = SignConvention::ALL.to_vec();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 8);
    }

    #[test]
    fn chsh_values() {
        assert_eq!(chsh_value(&matrix([[1.0; 2]; 2]), SignConvention::STANDARD), 2.0);
        assert_eq!(chsh_value(&matrix([[1.0, 1.0], [1.0, -1.0]]), SignConvention::STANDARD), 4.0);
        for c in SignConvention::ALL {
            assert_eq!(chsh_value(&matrix([[0.0; 2]; 2]), c), 0.0);
        }
    }

    #[test]
    fn classification_boundaries_fall_inward() {
        assert_eq!(classify(2.0 + 5e-10), Classification::Local);
        assert_eq!(classify(2.0 + 2e-9), Classification::QuantumCompatible);
        assert_eq!(classify(TSIRELSON_BOUND + 5e-10), Classification::QuantumCompatible);
        assert_eq!(classify(TSIRELSON_BOUND + 2e-9), Classification::SupraQuantum);
        assert_eq!(classify(4.0), Classification::SupraQuantum);
        assert_eq!(classify(4.1), Classification::Invalid);
    }

    #[test]
    fn report_on_reference_behaviors() {
        let pr = chsh_report(&correlation_matrix(&pr_box_behavior()));
        assert_eq!(pr.s_max_abs, 4.0);
        assert_eq!(pr.classification, Classification::SupraQuantum);
        assert_eq!(pr.max_convention(), (SignConvention::STANDARD, 4.0));

        let angles = SingletAngles::new(0.0, PI / 2.0, PI / 4.0, 3.0 * PI / 4.0);
        let singlet = chsh_report(&correlation_matrix(&singlet_behavior(&angles)));
        assert!((singlet.s_max_abs - TSIRELSON_BOUND).abs() < 1e-12);
        assert_eq!(singlet.classification, Classification::QuantumCompatible);
        assert!(singlet.s_by_convention.iter().any(|(_, s)| (s + TSIRELSON_BOUND).abs() < 1e-12));
    }

    #[test]
    fn strategy_encoding() {
        let all_plus = deterministic_strategy_behavior(0).unwrap();
        for &(x, y) in &SETTING_PAIRS {
            assert_eq!(all_plus.prob(x, y, Outcome::Plus, Outcome::Plus), 1.0);
        }
        // a ≡ +1, b(y) = (−1)^y
        let k1 = deterministic_strategy_behavior(1).unwrap();
        for x in 0..2 {
            assert_eq!(correlator(&k1, x, 0), 1.0);
            assert_eq!(correlator(&k1, x, 1), -1.0);
        }
        for k in 0..STRATEGY_COUNT {
            let s = DeterministicStrategy::from_index(k).unwrap();
            assert_eq!(s.index(), k);
            assert_eq!(nonsignalling_residual(&s.behavior()), 0.0);
        }
        assert_eq!(deterministic_strategy_behavior(16), Err(Error::IndexOutOfRange { what: "strategy", index: 16 }));
    }

    #[test]
    fn decompose_vertex_uniform_and_pr_box() {
        for k in [0, 5, 15] {
            let b = deterministic_strategy_behavior(k).unwrap();
            match local_model_decompose(&b, 1e-9).unwrap() {
                LocalModel::Feasible(d) => {
                    assert!((d.weights[k] - 1.0).abs() < 1e-12);
                    assert!(d.residual < 1e-12);
                }
                other => panic!("{other:?}"),
            }
        }

        // Uniform mixture of the 16 vertices reproduces P = 1/4.
        let uniform_mix = LocalDecomposition { weights: [1.0 / 16.0; 16], residual: 0.0 };
        assert!(uniform_mix.reconstruct().max_abs_diff(&BehaviorTable::uniform()) < 1e-15);
        let d = local_model_decompose(&BehaviorTable::uniform(), 1e-9).unwrap();
        assert!(d.is_feasible());

        match local_model_decompose(&pr_box_behavior(), 1e-9).unwrap() {
            LocalModel::Infeasible(cert) => {
                assert_eq!(cert.convention, SignConvention::STANDARD);
                assert_eq!(cert.value, 4.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn decompose_rejects_signalling() {
        let mut probs = [[[0.25; 4]; 2]; 2];
        probs[0][0] = [0.5, 0.5, 0.0, 0.0];
        let b = BehaviorTable::from_blocks(probs).unwrap();
        assert!(matches!(local_model_decompose(&b, 1e-9), Err(Error::SignallingInput { .. })));
    }

    #[test]
    fn strategies_saturate_but_never_exceed_local_bound() {
        for c in SignConvention::ALL {
            let mut best = f64::NEG_INFINITY;
            for k in 0..STRATEGY_COUNT {
                let s = chsh_value(&correlation_matrix(&deterministic_strategy_behavior(k).unwrap()), c);
                assert!(s.abs() <= 2.0);
                best = best.max(s);
            }
            assert_eq!(best, 2.0);
        }
    }
}
