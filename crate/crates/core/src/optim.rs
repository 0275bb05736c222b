//! Nelder–Mead simplex minimization with restarts.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadConfig {
    /// Edge length of the initial simplex in each coordinate.
    pub initial_step: f64,
    /// Stop when the simplex's function spread is below
    /// `f_tol · (1 + |f_best|)`.
    pub f_tol: f64,
    pub max_evaluations: usize,
    /// Restarts from the current best point; the run ends early once a
    /// restart fails to improve by more than the tolerance.
    pub max_restarts: usize,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self { initial_step: 0.5, f_tol: 1e-10, max_evaluations: 4000, max_restarts: 3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
    pub converged: bool,
}

fn eval(f: &mut impl FnMut(&[f64]) -> f64, x: &[f64], count: &mut usize) -> f64 {
    *count += 1;
    let v = f(x);
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimizes `f` from `start`. Non-finite values are treated as `+∞`.
pub fn nelder_mead(mut f: impl FnMut(&[f64]) -> f64, start: &[f64], config: &NelderMeadConfig) -> Minimum {
    let n = start.len();
    let mut evaluations = 0;
    let mut best_x = start.to_vec();
    let mut best_f = eval(&mut f, start, &mut evaluations);
    if n == 0 {
        return Minimum { x: best_x, f: best_f, evaluations, converged: true };
    }
    let mut converged = false;
    for _ in 0..=config.max_restarts {
        let before = best_f;
        let (x, fx, ok) = simplex_run(&mut f, &best_x, best_f, config, &mut evaluations);
        if fx <= best_f {
            best_x = x;
            best_f = fx;
        }
        converged = ok;
        let improvement = before - best_f;
        if !ok || improvement <= config.f_tol * (1.0 + best_f.abs()) || evaluations >= config.max_evaluations {
            break;
        }
    }
    Minimum { x: best_x, f: best_f, evaluations, converged: converged && best_f.is_finite() }
}

fn simplex_run(
    f: &mut impl FnMut(&[f64]) -> f64,
    start: &[f64],
    f_start: f64,
    config: &NelderMeadConfig,
    evaluations: &mut usize,
) -> (Vec<f64>, f64, bool) {
    const ALPHA: f64 = 1.0;
    const GAMMA: f64 = 2.0;
    const RHO: f64 = 0.5;
    const SIGMA: f64 = 0.5;

    let n = start.len();
    let mut points: Vec<Vec<f64>> = vec![start.to_vec()];
    let mut values = vec![f_start];
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += config.initial_step;
        values.push(eval(f, &p, evaluations));
        points.push(p);
    }

    loop {
        // Order indices by value; ties keep lower index first for determinism.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
        points = order.iter().map(|&i| points[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        if values[0].is_finite() && spread <= config.f_tol * (1.0 + values[0].abs()) {
            return (points[0].clone(), values[0], true);
        }
        if *evaluations >= config.max_evaluations {
            return (points[0].clone(), values[0], false);
        }

        let mut centroid = vec![0.0; n];
        for p in &points[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&points[n]).map(|(c, w)| c + t * (c - w)).collect() };

        let reflected = along(ALPHA);
        let fr = eval(f, &reflected, evaluations);
        if fr < values[0] {
            let expanded = along(GAMMA);
            let fe = eval(f, &expanded, evaluations);
            if fe < fr {
                points[n] = expanded;
                values[n] = fe;
            } else {
                points[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            points[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[n] {
            let c = along(RHO);
            let fc = eval(f, &c, evaluations);
            (c, fc)
        } else {
            let c = along(-RHO);
            let fc = eval(f, &c, evaluations);
            (c, fc)
        };
        if fc < values[n].min(fr) {
            points[n] = contracted;
            values[n] = fc;
            continue;
        }
        // Shrink toward the best point.
        let best = points[0].clone();
        for i in 1..=n {
            let p: Vec<f64> = best.iter().zip(&points[i]).map(|(b, q)| b + SIGMA * (q - b)).collect();
            values[i] = eval(f, &p, evaluations);
            points[i] = p;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let m = nelder_mead(
            |x| (x[0] - 1.5) * (x[0] - 1.5) + 3.0 * (x[1] + 0.5) * (x[1] + 0.5) + 2.0,
            &[0.0, 0.0],
            &NelderMeadConfig::default(),
        );
        assert!(m.converged);
        assert!((m.x[0] - 1.5).abs() < 1e-4);
        assert!((m.x[1] + 0.5).abs() < 1e-4);
        assert!((m.f - 2.0).abs() < 1e-9);
    }

    #[test]
    fn rosenbrock() {
        let cfg = NelderMeadConfig { max_evaluations: 20_000, ..Default::default() };
        let m = nelder_mead(|x| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2), &[-1.2, 1.0], &cfg);
        assert!((m.x[0] - 1.0).abs() < 1e-3, "{m:?}");
        assert!((m.x[1] - 1.0).abs() < 1e-3, "{m:?}");
    }

    #[test]
    fn infinite_region_is_avoided() {
        let m = nelder_mead(
            |x| if x[0] < 0.0 { f64::NAN } else { (x[0] - 0.25) * (x[0] - 0.25) },
            &[1.0],
            &NelderMeadConfig::default(),
        );
        assert!((m.x[0] - 0.25).abs() < 1e-4);
    }

    #[test]
    fn evaluation_budget_is_respected() {
        let cfg = NelderMeadConfig { max_evaluations: 30, max_restarts: 0, ..Default::default() };
        let m = nelder_mead(|x| x[0].abs() + x[1].abs() * 1e-3, &[100.0, 100.0], &cfg);
        assert!(!m.converged);
        assert!(m.evaluations <= 34);
    }
}
