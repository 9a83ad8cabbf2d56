//! Budgeted exact pruning by outer approximation over the convex integer
//! reformulation.

use std::collections::HashSet;
use std::io::Write;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::milp::{bnb_solve, BnBConfig, BnbStatus, MasterProblem};
use crate::numcore::{fit_weights, SupportFactorization};
use crate::rulespace::{AttributeScheme, RuleSpace, Selection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WarmStart {
    Greedy,
    Empty,
}

#[derive(Debug, Clone)]
pub struct ExactConfig {
    pub budget: u64,
    pub scheme: AttributeScheme,
    pub gamma: f64,
    /// Relative termination tolerance on `UB − LB`.
    pub tol: f64,
    pub max_iterations: usize,
    pub time_limit: Duration,
    pub warm_start: WarmStart,
    pub bnb: BnBConfig,
}

impl Default for ExactConfig {
    fn default() -> Self {
        Self {
            budget: 10,
            scheme: AttributeScheme::RuleWeight,
            gamma: 1.0,
            tol: 1e-6,
            max_iterations: 1000,
            time_limit: Duration::from_secs(600),
            warm_start: WarmStart::Greedy,
            bnb: BnBConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExactStatus {
    Converged,
    /// The master returned an already-cut point; its cut is tight there, so
    /// the bounds meet up to the master tolerance.
    RepeatedIterate,
    IterationLimit,
    TimeLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OaIterate {
    pub h: usize,
    pub upper: f64,
    pub lower: f64,
    pub gap: f64,
    pub cuts: usize,
}

#[derive(Debug, Clone)]
pub struct ExactResult {
    pub selection: Selection,
    pub upper: f64,
    pub lower: f64,
    pub gap: f64,
    pub iterations: usize,
    pub cuts: usize,
    pub status: ExactStatus,
    pub trace: Vec<OaIterate>,
}

/// `τ = (UB − LB)/UB`, zero when both vanish.
pub fn relative_gap(upper: f64, lower: f64) -> f64 {
    if upper.abs() <= f64::MIN_POSITIVE {
        0.0
    } else {
        ((upper - lower) / upper).max(0.0)
    }
}

fn validate(rs: &RuleSpace, y: &[f64], cfg: &ExactConfig) -> Result<()> {
    if y.len() != rs.n_rows() {
        return Err(Error::Dimension {
            expected: rs.n_rows(),
            found: y.len(),
        });
    }
    if !(cfg.gamma > 0.0 && cfg.gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {}", cfg.gamma)));
    }
    if !(cfg.tol >= 0.0) {
        return Err(Error::InvalidArgument("tolerance must be nonnegative".into()));
    }
    Ok(())
}

/// Greedy forward selection: repeatedly adds the node with the largest exact
/// objective decrease that keeps the support an antichain within budget.
pub fn warm_start(rs: &RuleSpace, y: &[f64], cfg: &ExactConfig) -> Result<Selection> {
    validate(rs, y, cfg)?;
    let v = rs.target(y);
    greedy(rs, &v, cfg)
}

fn greedy(rs: &RuleSpace, v: &[f64], cfg: &ExactConfig) -> Result<Selection> {
    let attrs = rs.attributes(cfg.scheme);
    let mut support: Vec<usize> = Vec::new();
    let mut used = 0u64;
    let mut blocked = vec![false; rs.m()];
    loop {
        let fact = SupportFactorization::new(rs, cfg.gamma, &support)?;
        let proj = fact.project(rs, v);
        let mut best: Option<(usize, f64)> = None;
        for j in 0..rs.m() {
            if blocked[j] || used + u64::from(attrs[j]) > cfg.budget {
                continue;
            }
            let gain = fact.addition_gain(rs, &proj.residual, j);
            if gain > 1e-12 * proj.value.max(1.0) && best.map_or(true, |(_, g)| gain > g) {
                best = Some((j, gain));
            }
        }
        let Some((j, _)) = best else {
            let weights = fact.project(rs, v).scaled_weights;
            return Ok(Selection {
                attribute_sum: used,
                objective: proj.value,
                support,
                weights,
            });
        };
        used += u64::from(attrs[j]);
        blocked[j] = true;
        for &a in &rs.column(j).ancestors {
            blocked[a] = true;
        }
        for &d in &rs.column(j).descendants {
            blocked[d] = true;
        }
        let pos = support.partition_point(|&s| s < j);
        support.insert(pos, j);
    }
}

/// Global parent array of the rule space (nearest candidate ancestor).
pub(crate) fn global_parents(rs: &RuleSpace) -> Vec<Option<usize>> {
    rs.columns().iter().map(|c| c.ancestors.last().copied()).collect()
}

/// Solves `min q(z)` over antichain supports with attribute sum at most `K`.
pub fn solve_exact(rs: &RuleSpace, y: &[f64], cfg: &ExactConfig) -> Result<ExactResult> {
    validate(rs, y, cfg)?;
    let start = Instant::now();
    let v = rs.target(y);
    let attrs = rs.attributes(cfg.scheme);

    let warm = match cfg.warm_start {
        WarmStart::Greedy => greedy(rs, &v, cfg)?,
        WarmStart::Empty => Selection::empty(0.5 * v.iter().map(|x| x * x).sum::<f64>()),
    };

    let mut master = MasterProblem::new(global_parents(rs))?
        .with_budget(attrs, cfg.budget)?
        .with_floor(0.0);
    let mut visited: HashSet<Vec<usize>> = HashSet::new();
    let mut best_support = warm.support.clone();
    let mut upper = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    let mut trace = Vec::new();
    let mut current = warm.support;
    let mut h = 0;

    let status = loop {
        // Evaluate and cut at the current iterate.
        let fact = SupportFactorization::new(rs, cfg.gamma, &current)?;
        let proj = fact.project(rs, &v);
        if proj.value < upper {
            upper = proj.value;
            best_support = current.clone();
        }
        let dots = rs.all_dots(&proj.residual);
        let gradient: Vec<f64> = dots.iter().map(|d| -0.5 * cfg.gamma * d * d).collect();
        let intercept = proj.value - current.iter().map(|&i| gradient[i]).sum::<f64>();
        master.add_cut(intercept, gradient)?;
        visited.insert(current.clone());

        let sol = bnb_solve(&master, &cfg.bnb)?;
        lower = lower.max(sol.bound.min(upper));
        h += 1;
        let gap = relative_gap(upper, lower);
        trace.push(OaIterate {
            h,
            upper,
            lower,
            gap,
            cuts: master.num_cuts(),
        });
        log::debug!("oa h={h} ub={upper:.10e} lb={lower:.10e} tau={gap:.3e}");
        if sol.status == BnbStatus::NodeLimit {
            log::warn!("master node limit reached at iteration {h}");
        }

        if upper - lower <= cfg.tol * upper.abs().max(1.0) {
            break ExactStatus::Converged;
        }
        let next: Vec<usize> = (0..rs.m()).filter(|&i| sol.z[i]).collect();
        if visited.contains(&next) {
            break ExactStatus::RepeatedIterate;
        }
        if h >= cfg.max_iterations {
            break ExactStatus::IterationLimit;
        }
        if start.elapsed() >= cfg.time_limit {
            break ExactStatus::TimeLimit;
        }
        current = next;
    };

    let weights = fit_weights(rs, cfg.gamma, &best_support, &v)?;
    let attribute_sum = rs.attribute_sum(cfg.scheme, &best_support);
    Ok(ExactResult {
        selection: Selection {
            support: best_support,
            weights,
            objective: upper,
            attribute_sum,
        },
        upper,
        lower,
        gap: relative_gap(upper, lower),
        iterations: h,
        cuts: master.num_cuts(),
        status,
        trace,
    })
}

/// Per-iteration trace as CSV: `h,upper,lower,gap,cuts`.
pub fn write_trace_csv<W: Write>(result: &ExactResult, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for it in &result.trace {
        wtr.serialize(it)?;
    }
    wtr.flush().map_err(|source| Error::Io {
        path: "<trace csv>".into(),
        source,
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::objective_q;
    use crate::rulespace::tests::depth2_space;

    fn cfg(k: u64) -> ExactConfig {
        ExactConfig {
            budget: k,
            tol: 1e-10,
            bnb: BnBConfig {
                rel_gap_tol: 1e-12,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    fn y8() -> Vec<f64> {
        vec![0.0, 0.0, 1.0, 1.0, 4.0, 4.0, 9.0, 9.0]
    }

    #[test]
    fn zero_budget_is_empty() {
        let rs = depth2_space(true);
        let y = y8();
        let r = solve_exact(&rs, &y, &cfg(0)).unwrap();
        assert!(r.selection.is_empty());
        let v = rs.target(&y);
        let half: f64 = 0.5 * v.iter().map(|x| x * x).sum::<f64>();
        assert!((r.upper - half).abs() < 1e-12);
        assert_eq!(r.gap, 0.0);
    }

    #[test]
    fn greedy_first_pick_is_best_singleton() {
        let rs = depth2_space(true);
        let y = y8();
        let c = cfg(1);
        let w = warm_start(&rs, &y, &c).unwrap();
        let v = rs.target(&y);
        let best = (0..rs.m())
            .map(|i| objective_q(&rs, c.gamma, &[i], &v).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(w.len(), 1);
        assert!((w.objective - best).abs() < 1e-12);
    }

    #[test]
    fn bounds_and_monotone_budget() {
        let rs = depth2_space(true);
        let y = y8();
        let mut prev = f64::INFINITY;
        for k in 0..5 {
            let r = solve_exact(&rs, &y, &cfg(k)).unwrap();
            assert!(rs.is_antichain(&r.selection.support));
            assert!(r.selection.attribute_sum <= k);
            assert!(r.upper >= r.lower);
            assert!(r.upper <= prev + 1e-12);
            for w in r.trace.windows(2) {
                assert!(w[1].lower >= w[0].lower);
                assert!(w[1].upper <= w[0].upper);
            }
            prev = r.upper;
        }
    }

    #[test]
    fn trace_csv_has_header() {
        let rs = depth2_space(true);
        let r = solve_exact(&rs, &y8(), &cfg(2)).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("h,upper,lower,gap,cuts"));
        assert_eq!(text.lines().count(), r.trace.len() + 1);
    }
}
