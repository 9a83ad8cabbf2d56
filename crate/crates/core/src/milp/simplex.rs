//! Dense-tableau bounded-variable primal simplex for the LP relaxation of a
//! master problem.
//!
//! Columns are `z` (bounds from the caller), `ν' = ν − L ≥ 0` where `L` is the
//! implied floor, then one slack per row. All slacks start basic; a single
//! pivot of `ν'` into the most violated cut row makes the start primal
//! feasible, since every other row has nonnegative coefficients and is
//! minimized at `z = lb`.

use super::MasterProblem;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub z: Vec<f64>,
    pub pivots: usize,
}

const FEAS_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;
const DEGENERATE_SWITCH: usize = 50;

struct Tableau {
    rows: usize,
    cols: usize,
    t: Vec<f64>,
    d: Vec<f64>,
    basis: Vec<usize>,
    x: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
}

impl Tableau {
    fn at(&self, r: usize, j: usize) -> f64 {
        self.t[r * self.cols + j]
    }

    /// Moves nonbasic `j` by `delta` and updates basic values.
    fn shift(&mut self, j: usize, delta: f64) {
        self.x[j] += delta;
        for r in 0..self.rows {
            let a = self.at(r, j);
            if a != 0.0 {
                let b = self.basis[r];
                self.x[b] -= a * delta;
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let cols = self.cols;
        let piv = self.at(r, j);
        let (before, rest) = self.t.split_at_mut(r * cols);
        let (prow, after) = rest.split_at_mut(cols);
        for v in prow.iter_mut() {
            *v /= piv;
        }
        prow[j] = 1.0;
        for other in before.chunks_exact_mut(cols).chain(after.chunks_exact_mut(cols)) {
            let f = other[j];
            if f != 0.0 {
                for (o, p) in other.iter_mut().zip(prow.iter()) {
                    *o -= f * p;
                }
                other[j] = 0.0;
            }
        }
        let f = self.d[j];
        if f != 0.0 {
            for (o, p) in self.d.iter_mut().zip(prow.iter()) {
                *o -= f * p;
            }
            self.d[j] = 0.0;
        }
        self.basis[r] = j;
    }
}

/// Solves the LP relaxation with per-variable bounds `lb ≤ z ≤ ub`.
pub fn lp_solve(p: &MasterProblem, lb: &[f64], ub: &[f64]) -> Result<LpSolution> {
    if p.num_cuts() == 0 {
        return Err(Error::Unbounded);
    }
    let n = p.num_vars();
    assert!(lb.len() == n && ub.len() == n);
    let floor = p.implied_floor();
    let cliques = p.cliques();
    let n_cuts = p.num_cuts();
    let rows = n_cuts + cliques.len() + usize::from(p.budget().is_some());
    let nu = n;
    let cols = n + 1 + rows;

    let mut t = vec![0.0; rows * cols];
    let mut rhs = vec![0.0; rows];
    for (k, c) in p.cuts().iter().enumerate() {
        t[k * cols..k * cols + n].copy_from_slice(&c.gradient);
        t[k * cols + nu] = -1.0;
        rhs[k] = floor - c.intercept;
    }
    for (q, clique) in cliques.iter().enumerate() {
        let r = n_cuts + q;
        for &i in clique {
            t[r * cols + i] = 1.0;
        }
        rhs[r] = 1.0;
    }
    if let Some(k) = p.budget() {
        let r = rows - 1;
        for (i, &a) in p.attrs().iter().enumerate() {
            t[r * cols + i] = f64::from(a);
        }
        rhs[r] = k as f64;
    }
    for r in 0..rows {
        t[r * cols + n + 1 + r] = 1.0;
    }

    let mut lo = vec![0.0; cols];
    let mut hi = vec![f64::INFINITY; cols];
    lo[..n].copy_from_slice(lb);
    hi[..n].copy_from_slice(ub);
    let mut x = vec![0.0; cols];
    x[..n].copy_from_slice(lb);
    for r in 0..rows {
        let ax: f64 = (0..n).map(|i| t[r * cols + i] * lb[i]).sum();
        x[n + 1 + r] = rhs[r] - ax;
    }
    let mut d = vec![0.0; cols];
    d[nu] = 1.0;
    let mut tab = Tableau {
        rows,
        cols,
        t,
        d,
        basis: (0..rows).map(|r| n + 1 + r).collect(),
        x,
        lb: lo,
        ub: hi,
    };

    // Bounds already crossed, or a non-cut row violated at z = lb.
    if (0..n).any(|i| lb[i] > ub[i] + FEAS_TOL)
        || (n_cuts..rows).any(|r| tab.x[n + 1 + r] < -FEAS_TOL)
    {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            objective: f64::INFINITY,
            z: lb.to_vec(),
            pivots: 0,
        });
    }

    let mut pivots = 0;
    let worst = (0..n_cuts)
        .min_by(|&a, &b| {
            tab.x[n + 1 + a]
                .partial_cmp(&tab.x[n + 1 + b])
                .unwrap()
                .then(a.cmp(&b))
        })
        .unwrap();
    let violation = -tab.x[n + 1 + worst];
    if violation > 0.0 {
        tab.shift(nu, violation);
        tab.x[n + 1 + worst] = 0.0;
        tab.pivot(worst, nu);
        pivots += 1;
    }

    let max_iter = 100 * (rows + cols) + 1000;
    let mut degenerate_run = 0;
    loop {
        if pivots > max_iter {
            return Err(Error::InvalidArgument(format!(
                "simplex iteration limit ({max_iter}) reached"
            )));
        }
        let bland = degenerate_run >= DEGENERATE_SWITCH;
        let mut enter: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        let is_basic = {
            let mut b = vec![false; cols];
            for &v in &tab.basis {
                b[v] = true;
            }
            b
        };
        for j in 0..cols {
            if is_basic[j] || tab.ub[j] - tab.lb[j] <= 0.0 {
                continue;
            }
            let dj = tab.d[j];
            let at_lower = tab.x[j] <= tab.lb[j];
            let dir = if at_lower && dj < -FEAS_TOL {
                1.0
            } else if !at_lower && dj > FEAS_TOL {
                -1.0
            } else {
                continue;
            };
            if bland {
                enter = Some((j, dir));
                break;
            }
            if dj.abs() > best_score {
                best_score = dj.abs();
                enter = Some((j, dir));
            }
        }
        let Some((j, dir)) = enter else { break };

        let mut step = tab.ub[j] - tab.lb[j];
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..rows {
            let rate = -tab.at(r, j) * dir;
            if rate.abs() <= PIVOT_TOL {
                continue;
            }
            let b = tab.basis[r];
            let room = if rate < 0.0 {
                ((tab.x[b] - tab.lb[b]).max(0.0) / -rate, tab.lb[b])
            } else if tab.ub[b].is_finite() {
                ((tab.ub[b] - tab.x[b]).max(0.0) / rate, tab.ub[b])
            } else {
                continue;
            };
            let eps = 1e-12 * room.0.max(1.0);
            let better = room.0 < step - eps
                || (room.0 <= step + eps && leave.map_or(false, |(lr, _)| b < tab.basis[lr]));
            if better {
                step = room.0.min(step);
                leave = Some((r, room.1));
            }
        }
        if !step.is_finite() {
            return Err(Error::Unbounded);
        }
        if step <= 1e-12 {
            degenerate_run += 1;
        } else {
            degenerate_run = 0;
        }
        tab.shift(j, dir * step);
        match leave {
            None => {
                tab.x[j] = if dir > 0.0 { tab.ub[j] } else { tab.lb[j] };
            }
            Some((r, bound)) => {
                let b = tab.basis[r];
                tab.pivot(r, j);
                tab.x[b] = bound;
            }
        }
        pivots += 1;
    }

    let z: Vec<f64> = tab.x[..n]
        .iter()
        .zip(lb.iter().zip(ub))
        .map(|(&v, (&l, &u))| v.clamp(l, u))
        .collect();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective: tab.x[nu] + floor,
        z,
        pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> (Vec<f64>, Vec<f64>) {
        (vec![0.0; n], vec![1.0; n])
    }

    #[test]
    fn constant_cut() {
        let mut p = MasterProblem::new(vec![None, None]).unwrap();
        p.add_cut(5.0, vec![0.0, 0.0]).unwrap();
        let (l, u) = unit(2);
        let s = lp_solve(&p, &l, &u).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 5.0).abs() < 1e-12);
    }

    #[test]
    fn min_max_of_two_lines() {
        let mut p = MasterProblem::new(vec![None]).unwrap();
        p.add_cut(0.0, vec![1.0]).unwrap();
        p.add_cut(1.0, vec![-1.0]).unwrap();
        let (l, u) = unit(1);
        let s = lp_solve(&p, &l, &u).unwrap();
        assert!((s.objective - 0.5).abs() < 1e-12);
        assert!((s.z[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_budget_forces_origin() {
        let mut p = MasterProblem::new(vec![None, None, None])
            .unwrap()
            .with_budget(vec![1, 1, 1], 0)
            .unwrap();
        p.add_cut(3.0, vec![-1.0, -2.0, -0.5]).unwrap();
        p.add_cut(2.0, vec![-4.0, 0.0, 0.0]).unwrap();
        let (l, u) = unit(3);
        let s = lp_solve(&p, &l, &u).unwrap();
        assert!((s.objective - 3.0).abs() < 1e-12);
        assert!(s.z.iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn clique_limits_fraction() {
        // Root and two leaves; the leaves together beat the root.
        let mut p = MasterProblem::new(vec![None, Some(0), Some(0)]).unwrap();
        p.add_cut(10.0, vec![-3.0, -2.0, -2.0]).unwrap();
        let (l, u) = unit(3);
        let s = lp_solve(&p, &l, &u).unwrap();
        assert!((s.objective - 6.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_bounds() {
        let mut p = MasterProblem::new(vec![None, Some(0)]).unwrap();
        p.add_cut(0.0, vec![0.0, 0.0]).unwrap();
        let s = lp_solve(&p, &[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(s.status, LpStatus::Infeasible);
    }

    #[test]
    fn needs_a_cut() {
        let p = MasterProblem::new(vec![None]).unwrap();
        assert!(matches!(lp_solve(&p, &[0.0], &[1.0]), Err(Error::Unbounded)));
    }

    #[test]
    fn respects_floor() {
        let mut p = MasterProblem::new(vec![None]).unwrap().with_floor(0.0);
        p.add_cut(1.0, vec![-5.0]).unwrap();
        let s = lp_solve(&p, &[0.0], &[1.0]).unwrap();
        assert!(s.objective.abs() < 1e-12);
    }
}
