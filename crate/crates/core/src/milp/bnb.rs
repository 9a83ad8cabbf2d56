//! Best-bound branch and bound over the simplex relaxation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{lp_solve, max_weight_antichain, LpStatus, MasterProblem};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BnBConfig {
    pub rel_gap_tol: f64,
    pub int_tol: f64,
    pub node_limit: usize,
}

impl Default for BnBConfig {
    fn default() -> Self {
        Self {
            rel_gap_tol: 1e-6,
            int_tol: 1e-6,
            node_limit: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BnbStatus {
    Optimal,
    NodeLimit,
}

#[derive(Debug, Clone)]
pub struct BnbResult {
    pub z: Vec<bool>,
    pub objective: f64,
    pub bound: f64,
    pub nodes: usize,
    pub pivots: usize,
    pub status: BnbStatus,
}

struct Node {
    bound: f64,
    seq: usize,
    lb: Vec<f64>,
    ub: Vec<f64>,
    z: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Max-heap: smallest bound first, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(other.seq.cmp(&self.seq))
    }
}

/// Drops variables whose every cut coefficient is nonnegative: setting them to
/// zero never raises the model and keeps every row satisfied.
fn reduce(p: &MasterProblem) -> Result<(MasterProblem, Vec<usize>)> {
    let n = p.num_vars();
    let keep: Vec<usize> = (0..n)
        .filter(|&i| p.cuts().iter().any(|c| c.gradient[i] < 0.0))
        .collect();
    if keep.len() == n {
        return Ok((p.clone(), keep));
    }
    let mut local = vec![usize::MAX; n];
    for (a, &i) in keep.iter().enumerate() {
        local[i] = a;
    }
    let parent: Vec<Option<usize>> = keep
        .iter()
        .map(|&i| {
            let mut cur = p.parent()[i];
            while let Some(q) = cur {
                if local[q] != usize::MAX {
                    return Some(local[q]);
                }
                cur = p.parent()[q];
            }
            None
        })
        .collect();
    let mut r = MasterProblem::new(parent)?;
    if let Some(k) = p.budget() {
        r = r.with_budget(keep.iter().map(|&i| p.attrs()[i]).collect(), k)?;
    }
    if let Some(f) = p.floor() {
        r = r.with_floor(f);
    }
    for c in p.cuts() {
        r.add_cut(c.intercept, keep.iter().map(|&i| c.gradient[i]).collect())?;
    }
    Ok((r, keep))
}

/// Rounds a fractional point to an antichain by DP, then drops the weakest
/// members until the budget holds.
fn round(p: &MasterProblem, z: &[f64]) -> Vec<bool> {
    let (_, mut sel) = max_weight_antichain(p.parent(), z);
    if let Some(k) = p.budget() {
        while p.attribute_sum(&sel) > k {
            let drop = (0..sel.len())
                .filter(|&i| sel[i] && p.attrs()[i] > 0)
                .min_by(|&a, &b| z[a].total_cmp(&z[b]).then(a.cmp(&b)))
                .expect("budget exceeded with no positive attribute");
            sel[drop] = false;
        }
    }
    sel
}

/// Minimizes the cut model over binary antichains within the budget.
pub fn bnb_solve(p: &MasterProblem, cfg: &BnBConfig) -> Result<BnbResult> {
    if p.num_cuts() == 0 {
        return Err(Error::Unbounded);
    }
    if !(cfg.rel_gap_tol >= 0.0 && cfg.int_tol > 0.0 && cfg.int_tol < 0.5) {
        return Err(Error::InvalidArgument("invalid branch-and-bound tolerances".into()));
    }
    let (rp, keep) = reduce(p)?;
    let n = rp.num_vars();
    let expand = |local: &[bool]| {
        let mut z = vec![false; p.num_vars()];
        for (a, &i) in keep.iter().enumerate() {
            z[i] = local[a];
        }
        z
    };

    let mut best_z = vec![false; n];
    let mut best = rp.model_value(&best_z);
    if n == 0 {
        return Ok(BnbResult {
            z: expand(&best_z),
            objective: best,
            bound: best,
            nodes: 0,
            pivots: 0,
            status: BnbStatus::Optimal,
        });
    }

    let gap = |inc: f64| cfg.rel_gap_tol * inc.abs().max(1.0);
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    let mut nodes = 0;
    let mut pivots = 0;

    let (lb, ub) = (vec![0.0; n], vec![1.0; n]);
    let root = lp_solve(&rp, &lb, &ub)?;
    pivots += root.pivots;
    if root.status == LpStatus::Infeasible {
        return Err(Error::Infeasible);
    }
    heap.push(Node {
        bound: root.objective,
        seq,
        lb,
        ub,
        z: root.z,
    });

    let mut bound = f64::NEG_INFINITY;
    let mut pruned = f64::INFINITY;
    let mut status = BnbStatus::Optimal;
    while let Some(node) = heap.pop() {
        if node.bound >= best - gap(best) {
            bound = node.bound.min(best);
            heap.clear();
            break;
        }
        if nodes >= cfg.node_limit {
            bound = node.bound;
            status = BnbStatus::NodeLimit;
            break;
        }
        nodes += 1;

        let cand = round(&rp, &node.z);
        if rp.is_feasible(&cand) {
            let v = rp.model_value(&cand);
            if v < best {
                best = v;
                best_z = cand;
            }
        }

        let mut branch: Option<(usize, f64)> = None;
        for (i, &v) in node.z.iter().enumerate() {
            let frac = (v - v.floor()).min(v.ceil() - v);
            if frac > cfg.int_tol && branch.map_or(true, |(_, f)| frac > f + 1e-12) {
                branch = Some((i, frac));
            }
        }
        let Some((var, _)) = branch else {
            let zi: Vec<bool> = node.z.iter().map(|&v| v > 0.5).collect();
            if rp.is_feasible(&zi) {
                let v = rp.model_value(&zi);
                if v < best {
                    best = v;
                    best_z = zi;
                }
            }
            continue;
        };

        for val in [0.0, 1.0] {
            let mut lb = node.lb.clone();
            let mut ub = node.ub.clone();
            lb[var] = val;
            ub[var] = val;
            let sol = lp_solve(&rp, &lb, &ub)?;
            pivots += sol.pivots;
            if sol.status == LpStatus::Infeasible {
                continue;
            }
            if sol.objective >= best - gap(best) {
                pruned = pruned.min(sol.objective);
                continue;
            }
            seq += 1;
            heap.push(Node {
                bound: sol.objective,
                seq,
                lb,
                ub,
                z: sol.z,
            });
        }
    }
    if status == BnbStatus::Optimal && bound == f64::NEG_INFINITY {
        bound = best;
    }
    bound = bound.min(pruned);
    Ok(BnbResult {
        z: expand(&best_z),
        objective: best,
        bound: bound.min(best),
        nodes,
        pivots,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(p: &MasterProblem) -> f64 {
        let n = p.num_vars();
        let mut best = f64::INFINITY;
        for mask in 0u64..(1 << n) {
            let z: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            if p.is_feasible(&z) {
                best = best.min(p.model_value(&z));
            }
        }
        best
    }

    fn random_problem(rng: &mut ChaCha8Rng) -> MasterProblem {
        let n = rng.gen_range(1..=14);
        let parent: Vec<Option<usize>> = (0..n)
            .map(|i| {
                if i == 0 || rng.gen_bool(0.25) {
                    None
                } else {
                    Some(rng.gen_range(0..i))
                }
            })
            .collect();
        let attrs: Vec<u32> = (0..n).map(|_| rng.gen_range(0..4)).collect();
        let mut p = MasterProblem::new(parent).unwrap();
        if rng.gen_bool(0.7) {
            p = p.with_budget(attrs, rng.gen_range(0..6)).unwrap();
        }
        for _ in 0..rng.gen_range(1..=6) {
            let g = (0..n).map(|_| rng.gen_range(-5.0..2.0)).collect();
            p.add_cut(rng.gen_range(0.0..10.0), g).unwrap();
        }
        p
    }

    #[test]
    fn matches_brute_force() {
        for seed in 0..80 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_problem(&mut rng);
            let cfg = BnBConfig {
                rel_gap_tol: 1e-12,
                ..Default::default()
            };
            let r = bnb_solve(&p, &cfg).unwrap();
            let b = brute(&p);
            assert!(p.is_feasible(&r.z), "seed {seed}");
            assert!((r.objective - b).abs() < 1e-9, "seed {seed}: {} vs {b}", r.objective);
            assert!((p.model_value(&r.z) - r.objective).abs() < 1e-12);
            assert!(r.bound <= r.objective + 1e-12);
        }
    }

    #[test]
    fn depth_one_tree_with_budget() {
        let mut p = MasterProblem::new(vec![None, Some(0), Some(0)])
            .unwrap()
            .with_budget(vec![1, 1, 1], 1)
            .unwrap();
        p.add_cut(10.0, vec![-3.0, -2.0, -2.5]).unwrap();
        p.add_cut(8.0, vec![0.0, -1.0, 0.0]).unwrap();
        let r = bnb_solve(&p, &BnBConfig::default()).unwrap();
        assert_eq!(r.objective, brute(&p));
        assert_eq!(r.objective, 8.0);
        assert_eq!(p.attribute_sum(&r.z), 1);
    }

    #[test]
    fn integral_root_needs_no_branching() {
        let mut p = MasterProblem::new(vec![None, Some(0), Some(0)]).unwrap();
        p.add_cut(4.0, vec![-1.0, -2.0, -2.0]).unwrap();
        let r = bnb_solve(&p, &BnBConfig::default()).unwrap();
        assert!(r.nodes <= 1);
        assert_eq!(r.z, vec![false, true, true]);
        assert_eq!(r.objective, 0.0);
    }

    #[test]
    fn positive_gradients_are_fixed() {
        let mut p = MasterProblem::new(vec![None, None]).unwrap();
        p.add_cut(1.0, vec![2.0, 3.0]).unwrap();
        let r = bnb_solve(&p, &BnBConfig::default()).unwrap();
        assert_eq!(r.z, vec![false, false]);
        assert_eq!(r.objective, 1.0);
        assert_eq!(r.nodes, 0);
    }
}
