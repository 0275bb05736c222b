//! Dense two-phase simplex for the small feasibility problems in [`crate::chsh`].
//!
//! Solves `min cᵀx` subject to `Ax = b`, `x ≥ 0`. Bland's rule is used for
//! both entering and leaving choices, which rules out cycling on the highly
//! degenerate local-polytope problems.

use alloc::vec;
use alloc::vec::Vec;

const PIVOT_EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rhs[r] /= p;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r];
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c];
            if f != 0.0 {
                for (v, pv) in self.rows[i].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                self.rhs[i] -= f * pivot_rhs;
            }
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations for `cost` over the columns `allowed` admits.
    /// Returns `false` when the problem is unbounded.
    fn optimize(&mut self, cost: &[f64], allowed: impl Fn(usize) -> bool) -> bool {
        let ncols = cost.len();
        for _ in 0..MAX_PIVOTS {
            let entering = (0..ncols).filter(|&j| allowed(j)).find(|&j| {
                let reduced =
                    cost[j] - self.basis.iter().zip(&self.rows).map(|(&bj, row)| cost[bj] * row[j]).sum::<f64>();
                reduced < -PIVOT_EPS
            });
            let Some(c) = entering else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c] > PIVOT_EPS {
                    let ratio = self.rhs[i] / row[c];
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - PIVOT_EPS
                                || ((ratio - lr).abs() <= PIVOT_EPS && self.basis[i] < self.basis[li])
                            {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return false;
            };
            self.pivot(r, c);
        }
        true
    }
}

/// Minimizes `cost·x` over `{x ≥ 0 : a·x = b}`. `a` is row-major.
pub(crate) fn solve(a: &[Vec<f64>], b: &[f64], cost: &[f64]) -> LpOutcome {
    let m = a.len();
    let n = cost.len();
    // Artificial variables occupy columns n..n+m.
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for (i, (row, &bi)) in a.iter().zip(b).enumerate() {
        let flip = if bi < 0.0 { -1.0 } else { 1.0 };
        let mut r: Vec<f64> = row.iter().map(|v| v * flip).collect();
        r.resize(n + m, 0.0);
        r[n + i] = 1.0;
        rows.push(r);
        rhs.push(bi * flip);
    }
    let mut t = Tableau { rows, rhs, basis: (n..n + m).collect() };

    let mut phase1 = vec![0.0; n + m];
    for c in phase1.iter_mut().skip(n) {
        *c = 1.0;
    }
    t.optimize(&phase1, |_| true);
    let infeasibility: f64 = t.basis.iter().zip(&t.rhs).filter(|(&bj, _)| bj >= n).map(|(_, &v)| v).sum();
    let scale = 1.0 + b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if infeasibility > 1e-9 * scale {
        return LpOutcome::Infeasible;
    }

    // Drive remaining (zero-valued) artificials out of the basis; rows where
    // that is impossible are redundant and dropped.
    let mut i = 0;
    while i < t.basis.len() {
        if t.basis[i] >= n {
            match (0..n).find(|&j| t.rows[i][j].abs() > PIVOT_EPS) {
                Some(j) => {
                    t.pivot(i, j);
                    i += 1;
                }
                None => {
                    t.rows.remove(i);
                    t.rhs.remove(i);
                    t.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }

    let mut phase2 = cost.to_vec();
    phase2.resize(n + m, 0.0);
    if !t.optimize(&phase2, |j| j < n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (&bj, &v) in t.basis.iter().zip(&t.rhs) {
        if bj < n {
            x[bj] = v.max(0.0);
        }
    }
    let objective = x.iter().zip(cost).map(|(xi, ci)| xi * ci).sum();
    LpOutcome::Optimal { x, objective }
}
