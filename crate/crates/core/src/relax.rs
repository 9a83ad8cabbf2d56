//! Convex relaxation over the antichain polytope followed by per-tree rounding.

use crate::error::{Error, Result};
use crate::exact::global_parents;
use crate::milp::{lp_solve, max_weight_antichain, LpStatus, MasterProblem};
use crate::numcore::{fit_weights, primal_objective, relaxed_cut};
use crate::rulespace::{AttributeScheme, RuleSpace, Selection};

#[derive(Debug, Clone, Copy)]
pub struct RelaxConfig {
    /// Relative tolerance on the Kelley gap.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for RelaxConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iterations: 2000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RelaxResult {
    /// Fractional point in `[0,1]^m` satisfying every path-clique row.
    pub zeta: Vec<f64>,
    /// Relaxed penalized objective at `zeta`.
    pub objective: f64,
    /// Certified lower bound on the relaxation optimum.
    pub lower_bound: f64,
    pub iterations: usize,
    pub rounded: Selection,
    /// Penalized objective of the rounded, refit selection.
    pub rounded_objective: f64,
}

/// Minimizes the relaxed penalized objective over `z ∈ [0,1]^m` with path
/// cliques by cutting planes on the linear relaxation, starting from `z = 0`.
pub fn solve_relaxation(
    rs: &RuleSpace,
    y: &[f64],
    lambda: f64,
    gamma: f64,
    scheme: AttributeScheme,
    cfg: &RelaxConfig,
) -> Result<(Vec<f64>, f64, f64, usize)> {
    if y.len() != rs.n_rows() {
        return Err(Error::Dimension {
            expected: rs.n_rows(),
            found: y.len(),
        });
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda must be nonnegative, got {lambda}")));
    }
    let v = rs.target(y);
    let attrs = rs.attributes(scheme);
    let m = rs.m();
    let mut master = MasterProblem::new(global_parents(rs))?.with_floor(0.0);
    let (lb, ub) = (vec![0.0; m], vec![1.0; m]);
    let mut z = vec![0.0; m];
    let mut best = (z.clone(), f64::INFINITY);
    let mut lower = f64::NEG_INFINITY;
    let mut h = 0;
    while h < cfg.max_iterations {
        h += 1;
        let cut = relaxed_cut(rs, gamma, &z, &v, lambda, &attrs)?;
        if cut.value < best.1 {
            best = (z.clone(), cut.value);
        }
        master.add_cut(cut.intercept(), cut.gradient)?;
        let sol = lp_solve(&master, &lb, &ub)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::Infeasible);
        }
        lower = lower.max(sol.objective);
        if best.1 - lower <= cfg.tol * best.1.abs().max(1.0) {
            break;
        }
        z = sol.z;
    }
    if best.1 - lower > cfg.tol * best.1.abs().max(1.0) {
        log::warn!("relaxation stopped after {h} iterations with gap {:.3e}", best.1 - lower);
    }
    Ok((best.0, best.1, lower.min(best.1), h))
}

/// Relaxation, then per tree the antichain carrying the most fractional mass,
/// then a ridge refit on the rounded support.
pub fn relax_and_round(
    rs: &RuleSpace,
    y: &[f64],
    lambda: f64,
    gamma: f64,
    scheme: AttributeScheme,
    cfg: &RelaxConfig,
) -> Result<RelaxResult> {
    let (zeta, objective, lower_bound, iterations) =
        solve_relaxation(rs, y, lambda, gamma, scheme, cfg)?;
    let support = round_zeta(rs, &zeta);
    let v = rs.target(y);
    let weights = fit_weights(rs, gamma, &support, &v)?;
    let loss = primal_objective(rs, gamma, &support, &weights, &v);
    let attribute_sum = rs.attribute_sum(scheme, &support);
    Ok(RelaxResult {
        zeta,
        objective,
        lower_bound,
        iterations,
        rounded_objective: loss + lambda * attribute_sum as f64,
        rounded: Selection {
            support,
            weights,
            objective: loss,
            attribute_sum,
        },
    })
}

/// Per-tree max-weight antichain rounding of a fractional point.
pub fn round_zeta(rs: &RuleSpace, zeta: &[f64]) -> Vec<usize> {
    let mut support = Vec::new();
    for t in 0..rs.num_trees() {
        let range = rs.tree_range(t);
        let parents: Vec<Option<usize>> = range
            .clone()
            .map(|i| rs.column(i).ancestors.last().map(|&a| a - range.start))
            .collect();
        let (_, sel) = max_weight_antichain(&parents, &zeta[range.clone()]);
        support.extend(sel.iter().enumerate().filter(|(_, &s)| s).map(|(k, _)| range.start + k));
    }
    support
}
