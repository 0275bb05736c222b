use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::RankTable;
use crate::{Error, Result};

/// Rank–frequency families. Every family is normalized over the finite support `1..=V`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum Family {
    /// `w(i) = 1/(A·e^{i/B} − 1)`, `A > e^{−1/B}`, `B > 0`.
    BeRank,
    /// `w(i) = e^{−i/B}`, `B > 0`.
    MbExponential,
    /// `w(i) = i^{−s}`, `s > 0`.
    Zipf,
    /// `w(i) = (i + q)^{−s}`, `s > 0`, `q > −1`.
    ZipfMandelbrot,
    /// `w(i) = exp(−(ln i − μ)²/(2σ²))/i`, `σ > 0`.
    DiscreteLognormal,
    /// `w(i) = e^{−(i/λ)^β}`, `λ > 0`, `0 < β ≤ 1`.
    StretchedExponential,
    /// `w(i) = Beta(i, ρ + 1)`, `ρ > 0`.
    YuleSimon,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::BeRank,
        Family::MbExponential,
        Family::Zipf,
        Family::ZipfMandelbrot,
        Family::DiscreteLognormal,
        Family::StretchedExponential,
        Family::YuleSimon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::BeRank => "BE_RANK",
            Family::MbExponential => "MB_EXPONENTIAL",
            Family::Zipf => "ZIPF",
            Family::ZipfMandelbrot => "ZIPF_MANDELBROT",
            Family::DiscreteLognormal => "DISCRETE_LOGNORMAL",
            Family::StretchedExponential => "STRETCHED_EXPONENTIAL",
            Family::YuleSimon => "YULE_SIMON",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name().eq_ignore_ascii_case(s.trim()))
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Family::BeRank => &["A", "B"],
            Family::MbExponential => &["B"],
            Family::Zipf => &["s"],
            Family::ZipfMandelbrot => &["s", "q"],
            Family::DiscreteLognormal => &["mu", "sigma"],
            Family::StretchedExponential => &["lambda", "beta"],
            Family::YuleSimon => &["rho"],
        }
    }

    pub fn n_params(self) -> usize {
        self.param_names().len()
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A family with concrete parameters (in [`Family::param_names`] order) and support size.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec {
    pub family: Family,
    pub params: Vec<f64>,
    pub support: u64,
}

impl FamilySpec {
    pub fn new(family: Family, params: &[f64], support: u64) -> Result<Self> {
        let spec = Self { family, params: params.to_vec(), support };
        Shape::from_spec(&spec)?;
        Ok(spec)
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.family.param_names().iter().position(|n| *n == name).map(|i| self.params[i])
    }

    pub fn named_params(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        self.family.param_names().iter().copied().zip(self.params.iter().copied())
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for FamilySpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        use serde::ser::{SerializeMap, SerializeStruct};

        struct Params<'a>(&'a FamilySpec);
        impl serde::Serialize for Params<'_> {
            fn serialize<S: serde::Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
                let mut map = serializer.serialize_map(Some(self.0.params.len()))?;
                for (name, v) in self.0.named_params() {
                    map.serialize_entry(name, &v)?;
                }
                map.end()
            }
        }

        let mut st = serializer.serialize_struct("FamilySpec", 3)?;
        st.serialize_field("family", &self.family)?;
        st.serialize_field("params", &Params(self))?;
        st.serialize_field("support", &self.support)?;
        st.end()
    }
}

/// `ln i` and `ln Γ(i)` for `i = 1..=V`, shared across likelihood evaluations.
#[derive(Debug, Clone)]
pub(crate) struct RankTables {
    pub ln_i: Vec<f64>,
    pub lgamma_i: Vec<f64>,
}

impl RankTables {
    pub fn new(support: u64) -> Self {
        let ln_i = (1..=support).map(|i| libm::log(i as f64)).collect();
        let lgamma_i = (1..=support).map(|i| libm::lgamma(i as f64)).collect();
        Self { ln_i, lgamma_i }
    }
}

/// Validated parameters in the form the log-weights are computed from.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Shape {
    /// `δ = A − e^{−1/B} > 0`, so `A·e^{i/B} − 1 = expm1((i−1)/B) + δ·e^{i/B}`.
    Be {
        delta: f64,
        inv_b: f64,
    },
    Mb {
        inv_b: f64,
    },
    Zipf {
        s: f64,
    },
    Zm {
        s: f64,
        q: f64,
    },
    Ln {
        mu: f64,
        inv_two_var: f64,
    },
    Se {
        ln_lambda: f64,
        beta: f64,
    },
    Ys {
        rho: f64,
        lgamma_rho1: f64,
    },
}

fn domain(family: Family, reason: String) -> Error {
    Error::ParamOutOfDomain { family: family.name(), reason }
}

impl Shape {
    pub fn from_spec(spec: &FamilySpec) -> Result<Shape> {
        let family = spec.family;
        if spec.params.len() != family.n_params() {
            return Err(domain(
                family,
                format!("expected {} parameters, got {}", family.n_params(), spec.params.len()),
            ));
        }
        if let Some(bad) = spec.params.iter().find(|p| !p.is_finite()) {
            return Err(domain(family, format!("non-finite parameter {bad}")));
        }
        if spec.support == 0 {
            return Err(domain(family, "support must be >= 1".into()));
        }
        let p = &spec.params;
        let positive = |name: &str, v: f64| {
            if v > 0.0 {
                Ok(v)
            } else {
                Err(domain(family, format!("{name} = {v} must be > 0")))
            }
        };
        Ok(match family {
            Family::BeRank => {
                let (a, b) = (p[0], positive("B", p[1])?);
                let delta = a - libm::exp(-1.0 / b);
                if !(delta > 0.0) {
                    return Err(domain(
                        family,
                        format!("A = {a} must exceed exp(-1/B) = {} (pole at A·e^(i/B) = 1)", libm::exp(-1.0 / b)),
                    ));
                }
                Shape::Be { delta, inv_b: 1.0 / b }
            }
            Family::MbExponential => Shape::Mb { inv_b: 1.0 / positive("B", p[0])? },
            Family::Zipf => Shape::Zipf { s: positive("s", p[0])? },
            Family::ZipfMandelbrot => {
                if !(p[1] > -1.0) {
                    return Err(domain(family, format!("q = {} must be > -1", p[1])));
                }
                Shape::Zm { s: positive("s", p[0])?, q: p[1] }
            }
            Family::DiscreteLognormal => {
                let sigma = positive("sigma", p[1])?;
                Shape::Ln { mu: p[0], inv_two_var: 1.0 / (2.0 * sigma * sigma) }
            }
            Family::StretchedExponential => {
                let lambda = positive("lambda", p[0])?;
                let beta = positive("beta", p[1])?;
                if beta > 1.0 {
                    return Err(domain(family, format!("beta = {beta} must be <= 1")));
                }
                Shape::Se { ln_lambda: libm::log(lambda), beta }
            }
            Family::YuleSimon => {
                let rho = positive("rho", p[0])?;
                Shape::Ys { rho, lgamma_rho1: libm::lgamma(rho + 1.0) }
            }
        })
    }

    /// Unnormalized log-weight of rank `i` (1-based), with `ln_i = ln i`.
    pub fn log_weight(&self, i: u64, ln_i: f64, lgamma_i: f64) -> f64 {
        let fi = i as f64;
        match *self {
            Shape::Be { delta, inv_b } => {
                let denom = libm::expm1((fi - 1.0) * inv_b) + delta * libm::exp(fi * inv_b);
                -libm::log(denom)
            }
            Shape::Mb { inv_b } => -fi * inv_b,
            Shape::Zipf { s } => -s * ln_i,
            Shape::Zm { s, q } => -s * libm::log(fi + q),
            Shape::Ln { mu, inv_two_var } => {
                let d = ln_i - mu;
                -d * d * inv_two_var - ln_i
            }
            Shape::Se { ln_lambda, beta } => -libm::exp(beta * (ln_i - ln_lambda)),
            Shape::Ys { rho, lgamma_rho1 } => lgamma_i + lgamma_rho1 - libm::lgamma(fi + rho + 1.0),
        }
    }

    /// Log-weights for ranks `1..=V` and their log-normalizer.
    pub fn log_weights(&self, tables: &RankTables, out: &mut Vec<f64>) -> f64 {
        out.clear();
        out.extend(
            tables
                .ln_i
                .iter()
                .zip(&tables.lgamma_i)
                .enumerate()
                .map(|(k, (&ln_i, &lg))| self.log_weight(k as u64 + 1, ln_i, lg)),
        );
        log_sum_exp(out)
    }

    /// Multinomial log-likelihood of `table` given precomputed tables.
    pub fn loglik(&self, table: &RankTable, tables: &RankTables, scratch: &mut Vec<f64>) -> f64 {
        if table.total() == 0 {
            return 0.0;
        }
        let log_norm = self.log_weights(tables, scratch);
        table
            .entries()
            .iter()
            .filter(|&&(_, n)| n > 0)
            .map(|&(rank, n)| n as f64 * (scratch[rank as usize - 1] - log_norm))
            .sum()
    }
}

impl Shape {
    /// `Σ_i f_i · ln pmf(i)` for frequencies `f_i = n_i/N` at 1-based ranks.
    pub fn mean_loglik(&self, freqs: &[(u64, f64)], tables: &RankTables, scratch: &mut Vec<f64>) -> f64 {
        let log_norm = self.log_weights(tables, scratch);
        freqs.iter().map(|&(rank, f)| f * (scratch[rank as usize - 1] - log_norm)).sum()
    }
}

pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|v| libm::exp(v - max)).sum();
    max + libm::log(sum)
}

fn check_rank(spec: &FamilySpec, rank: u64) -> Result<()> {
    if rank == 0 || rank > spec.support {
        return Err(Error::RankOutOfSupport { rank, support: spec.support });
    }
    Ok(())
}

/// Normalized probability of rank `i` under `spec`.
pub fn pmf(spec: &FamilySpec, i: u64) -> Result<f64> {
    let shape = Shape::from_spec(spec)?;
    check_rank(spec, i)?;
    let tables = RankTables::new(spec.support);
    let mut lw = Vec::new();
    let log_norm = shape.log_weights(&tables, &mut lw);
    Ok(libm::exp(lw[i as usize - 1] - log_norm))
}

/// The full pmf over `1..=V`.
pub fn pmf_vector(spec: &FamilySpec) -> Result<Vec<f64>> {
    let shape = Shape::from_spec(spec)?;
    let tables = RankTables::new(spec.support);
    let mut lw = Vec::new();
    let log_norm = shape.log_weights(&tables, &mut lw);
    Ok(lw.iter().map(|v| libm::exp(v - log_norm)).collect())
}

/// `Σ_i n_i · ln pmf(spec, i)`; the multinomial coefficient is omitted.
pub fn loglik(spec: &FamilySpec, table: &RankTable) -> Result<f64> {
    let shape = Shape::from_spec(spec)?;
    if let Some(&(rank, _)) = table.entries().iter().find(|&&(r, n)| n > 0 && r > spec.support) {
        return Err(Error::RankOutOfSupport { rank, support: spec.support });
    }
    let tables = RankTables::new(spec.support);
    Ok(shape.loglik(table, &tables, &mut Vec::new()))
}
