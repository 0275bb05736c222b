//! Maximum-likelihood fitting and AIC/BIC model selection.
//!
//! Each family is optimized in an unconstrained parameterization that keeps
//! every point in domain:
//!
//! | family | parameters from θ |
//! |---|---|
//! | BE_RANK | `B = e^{θ₁}`, `A = e^{−1/B} + e^{θ₀}` |
//! | MB_EXPONENTIAL | `B = e^{θ₀}` |
//! | ZIPF | `s = e^{θ₀}` |
//! | ZIPF_MANDELBROT | `s = e^{θ₀}`, `q = −1 + e^{θ₁}` |
//! | DISCRETE_LOGNORMAL | `μ = θ₀`, `σ = e^{θ₁}` |
//! | STRETCHED_EXPONENTIAL | `λ = e^{θ₀}`, `β = 1/(1 + e^{−θ₁})` |
//! | YULE_SIMON | `ρ = e^{θ₀}` |
//!
//! Start lattice (`starts_per_dim` points per axis, endpoints included,
//! log-spaced unless noted, `V` the support):
//!
//! | family | axis 0 | axis 1 |
//! |---|---|---|
//! | BE_RANK | `A − e^{−1/B}` in `[1e−6, 1e2]` | `B` in `[1, V]` |
//! | MB_EXPONENTIAL | `B` in `[1, V]` | |
//! | ZIPF | `s` in `[0.25, 4]` | |
//! | ZIPF_MANDELBROT | `s` in `[0.25, 4]` | `q + 1` in `[0.1, 1e3]` |
//! | DISCRETE_LOGNORMAL | `μ` in `[−2, ln V]` (linear) | `σ` in `[0.25, 4]` |
//! | STRETCHED_EXPONENTIAL | `λ` in `[1, V]` | `β` in `[0.1, 0.9]` (linear) |
//! | YULE_SIMON | `ρ` in `[0.25, 4]` | |
//!
//! Every lattice point is evaluated; Nelder–Mead then runs from the
//! `local_searches` best lattice points (ties by lattice index). The result
//! is the best local optimum by `(loglik, start index)`.

use alloc::vec::Vec;

use super::family::{Family, FamilySpec, RankTables, Shape};
use super::RankTable;
use crate::optim::{nelder_mead, NelderMeadConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub starts_per_dim: usize,
    pub local_searches: usize,
    pub nelder_mead: NelderMeadConfig,
    /// Relative loglik agreement between the two best local searches
    /// required for the `converged` flag.
    pub agreement_tol: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { starts_per_dim: 5, local_searches: 3, nelder_mead: NelderMeadConfig::default(), agreement_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct OptimizerTrace {
    pub lattice_points: usize,
    pub local_searches: usize,
    pub best_start: usize,
    pub evaluations: usize,
    /// `ℓ_best − ℓ_second` over local searches (0 with a single search).
    pub best_two_gap: f64,
    pub note: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FitResult {
    pub spec: FamilySpec,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub k: usize,
    pub n_obs: u64,
    pub converged: bool,
    pub trace: OptimizerTrace,
}

impl FitResult {
    pub fn family(&self) -> Family {
        self.spec.family
    }
}

pub(crate) fn shape_from_theta(family: Family, theta: &[f64]) -> Option<(Shape, Vec<f64>)> {
    let e = libm::exp;
    let (shape, params) = match family {
        Family::BeRank => {
            let b = e(theta[1]);
            let delta = e(theta[0]);
            let a = e(-1.0 / b) + delta;
            (Shape::Be { delta, inv_b: 1.0 / b }, alloc::vec![a, b])
        }
        Family::MbExponential => {
            let b = e(theta[0]);
            (Shape::Mb { inv_b: 1.0 / b }, alloc::vec![b])
        }
        Family::Zipf => {
            let s = e(theta[0]);
            (Shape::Zipf { s }, alloc::vec![s])
        }
        Family::ZipfMandelbrot => {
            let s = e(theta[0]);
            let q = -1.0 + e(theta[1]);
            if !(q > -1.0) {
                return None;
            }
            (Shape::Zm { s, q }, alloc::vec![s, q])
        }
        Family::DiscreteLognormal => {
            let sigma = e(theta[1]);
            (Shape::Ln { mu: theta[0], inv_two_var: 1.0 / (2.0 * sigma * sigma) }, alloc::vec![theta[0], sigma])
        }
        Family::StretchedExponential => {
            let beta = 1.0 / (1.0 + e(-theta[1]));
            (Shape::Se { ln_lambda: theta[0], beta }, alloc::vec![e(theta[0]), beta])
        }
        Family::YuleSimon => {
            let rho = e(theta[0]);
            (Shape::Ys { rho, lgamma_rho1: libm::lgamma(rho + 1.0) }, alloc::vec![rho])
        }
    };
    let ok = params.iter().all(|p| p.is_finite())
        && match shape {
            Shape::Be { delta, inv_b } => delta > 0.0 && inv_b > 0.0 && inv_b.is_finite(),
            Shape::Mb { inv_b } => inv_b > 0.0 && inv_b.is_finite(),
            Shape::Zipf { s } | Shape::Zm { s, .. } => s > 0.0,
            Shape::Ln { inv_two_var, .. } => inv_two_var.is_finite() && inv_two_var > 0.0,
            Shape::Se { beta, .. } => beta > 0.0 && beta <= 1.0,
            Shape::Ys { rho, .. } => rho > 0.0,
        };
    // Near a boundary, e^θ can underflow (λ = 0) or A − e^{−1/B} can round to
    // 0; such points must not be reported as fits.
    let representable = ok && Shape::from_spec(&FamilySpec { family, params: params.clone(), support: 1 }).is_ok();
    representable.then_some((shape, params))
}

enum Axis {
    Log(f64, f64),
    Linear(f64, f64),
}

impl Axis {
    fn points(&self, n: usize) -> Vec<f64> {
        let t = |j: usize| if n == 1 { 0.5 } else { j as f64 / (n - 1) as f64 };
        (0..n)
            .map(|j| match *self {
                Axis::Log(lo, hi) => libm::exp(libm::log(lo) + t(j) * (libm::log(hi) - libm::log(lo))),
                Axis::Linear(lo, hi) => lo + t(j) * (hi - lo),
            })
            .collect()
    }
}

/// Maps natural-parameter lattice coordinates to θ.
fn lattice(family: Family, support: u64, n: usize) -> Vec<Vec<f64>> {
    let v = (support as f64).max(1.0);
    let ln = libm::log;
    let axes: Vec<Axis> = match family {
        Family::BeRank => alloc::vec![Axis::Log(1e-6, 1e2), Axis::Log(1.0, v)],
        Family::MbExponential => alloc::vec![Axis::Log(1.0, v)],
        Family::Zipf | Family::YuleSimon => alloc::vec![Axis::Log(0.25, 4.0)],
        Family::ZipfMandelbrot => alloc::vec![Axis::Log(0.25, 4.0), Axis::Log(0.1, 1e3)],
        Family::DiscreteLognormal => alloc::vec![Axis::Linear(-2.0, ln(v)), Axis::Log(0.25, 4.0)],
        Family::StretchedExponential => alloc::vec![Axis::Log(1.0, v), Axis::Linear(0.1, 0.9)],
    };
    let to_theta = |axis: usize, value: f64| -> f64 {
        match (family, axis) {
            (Family::DiscreteLognormal, 0) => value,
            (Family::StretchedExponential, 1) => ln(value / (1.0 - value)),
            _ => ln(value),
        }
    };
    let coords: Vec<Vec<f64>> =
        axes.iter().enumerate().map(|(a, axis)| axis.points(n).into_iter().map(|v| to_theta(a, v)).collect()).collect();
    let mut out: Vec<Vec<f64>> = alloc::vec![Vec::new()];
    for axis in &coords {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for &c in axis {
                let mut p = prefix.clone();
                p.push(c);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn check_table(table: &RankTable, support: u64) -> Result<()> {
    if table.total() == 0 {
        return Err(Error::InvalidRankTable("fitting needs at least one observation".into()));
    }
    if support < table.max_rank() {
        return Err(Error::RankOutOfSupport { rank: table.max_rank(), support });
    }
    Ok(())
}

/// Fits `family` to `table` over support `1..=support` by maximum likelihood.
pub fn fit_mle(family: Family, table: &RankTable, support: u64, config: &FitConfig) -> Result<FitResult> {
    check_table(table, support)?;
    if config.starts_per_dim == 0 || config.local_searches == 0 {
        return Err(Error::InvalidArgument("starts_per_dim and local_searches must be >= 1".into()));
    }
    let tables = RankTables::new(support);
    let n_obs = table.total();
    let n = n_obs as f64;
    // Frequencies n_i/N are unchanged bit-for-bit when every count is scaled
    // by the same integer, so the search path is too.
    let freqs: Vec<(u64, f64)> =
        table.entries().iter().filter(|&&(_, c)| c > 0).map(|&(r, c)| (r, c as f64 / n)).collect();
    let mut scratch = Vec::with_capacity(support as usize);
    let mut objective = |theta: &[f64]| -> f64 {
        match shape_from_theta(family, theta) {
            Some((shape, _)) => {
                let ll = shape.mean_loglik(&freqs, &tables, &mut scratch);
                if ll.is_finite() {
                    -ll
                } else {
                    f64::INFINITY
                }
            }
            None => f64::INFINITY,
        }
    };

    let points = lattice(family, support, config.starts_per_dim);
    let mut evaluations = points.len();
    let mut screened: Vec<(usize, f64)> = points.iter().enumerate().map(|(j, p)| (j, objective(p))).collect();
    screened.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

    // (lattice index, −loglik/N, θ)
    let mut locals: Vec<(usize, f64, Vec<f64>)> = Vec::new();
    for &(j, f0) in screened.iter().take(config.local_searches) {
        if !f0.is_finite() {
            continue;
        }
        let m = nelder_mead(&mut objective, &points[j], &config.nelder_mead);
        evaluations += m.evaluations;
        if m.f.is_finite() {
            locals.push((j, m.f, m.x));
        }
    }
    if locals.is_empty() {
        return Err(Error::OptimizationFailed(family.name()));
    }
    locals.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

    let (best_start, best_f, ref theta) = locals[0];
    let (_, params) = shape_from_theta(family, theta).expect("finite objective implies valid θ");
    let spec = FamilySpec { family, params, support };
    let loglik = -best_f * n;
    let best_two_gap = locals.get(1).map_or(0.0, |second| (second.1 - best_f) * n);
    let converged = best_two_gap.abs() <= config.agreement_tol * loglik.abs().max(1.0);
    let note = if table.observed_ranks() < 2 {
        Some("fewer than two observed ranks: the likelihood is flat or maximized at a parameter boundary")
    } else if !converged {
        Some("best local searches disagree; the optimum may lie on a ridge or at a boundary")
    } else {
        None
    };
    let k = family.n_params();
    Ok(FitResult {
        spec,
        loglik,
        aic: 2.0 * k as f64 - 2.0 * loglik,
        bic: k as f64 * libm::log(n) - 2.0 * loglik,
        k,
        n_obs,
        converged,
        trace: OptimizerTrace {
            lattice_points: points.len(),
            local_searches: locals.len(),
            best_start,
            evaluations,
            best_two_gap,
            note,
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSelection {
    /// Successful fits, best AIC first.
    pub ranked: Vec<FitResult>,
    /// Families whose fit failed, with the reason.
    pub excluded: Vec<(Family, Error)>,
}

impl ModelSelection {
    pub fn best(&self) -> &FitResult {
        &self.ranked[0]
    }

    pub fn get(&self, family: Family) -> Option<&FitResult> {
        self.ranked.iter().find(|f| f.family() == family)
    }
}

/// Fits every family and ranks by AIC; ties go to fewer parameters, then family order.
pub fn model_select(
    table: &RankTable,
    families: &[Family],
    support: u64,
    config: &FitConfig,
) -> Result<ModelSelection> {
    let mut unique: Vec<Family> = families.to_vec();
    unique.sort();
    unique.dedup();
    if unique.len() < 2 {
        return Err(Error::TooFewFamilies(unique.len()));
    }
    check_table(table, support)?;
    let mut ranked = Vec::new();
    let mut excluded = Vec::new();
    for family in unique {
        match fit_mle(family, table, support, config) {
            Ok(fit) => ranked.push(fit),
            Err(e) => excluded.push((family, e)),
        }
    }
    if ranked.is_empty() {
        let (family, _) = excluded[0];
        return Err(Error::OptimizationFailed(family.name()));
    }
    ranked.sort_by(|a, b| a.aic.total_cmp(&b.aic).then(a.k.cmp(&b.k)).then(a.family().name().cmp(b.family().name())));
    Ok(ModelSelection { ranked, excluded })
}

/// Log-likelihood of held-out counts under the frozen fitted parameters.
pub fn holdout_loglik(fit: &FitResult, test: &RankTable) -> Result<f64> {
    super::family::loglik(&fit.spec, test)
}
