//! Penalized pruning by cyclic block coordinate descent over trees.
//!
//! Each block update re-optimizes one tree's selection and weights against the
//! residual of the others by outer approximation. Cuts from earlier updates of
//! the same tree are recycled: the factorization of each visited support is
//! kept, so a cut for a new residual needs only triangular solves and one pass
//! of tree-local dot products.

use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

use serde::Serialize;

use crate::dataio::{Dataset, ModelMetadata};
use crate::ensemble::r2;
use crate::error::{Error, Result};
use crate::milp::{bnb_solve, max_weight_antichain, BnBConfig, MasterProblem};
use crate::numcore::{cut_from_factorization, Cut, SupportFactorization};
use crate::rulespace::{AttributeScheme, RuleSpace, Selection};

#[derive(Debug, Clone, Copy)]
pub struct BlockConfig {
    /// Relative tolerance on the block OA gap.
    pub tol: f64,
    pub bnb: BnBConfig,
    pub pool_cap: usize,
    /// Recycled cuts entering the master, lowest value first. All of them
    /// still serve as upper bounds.
    pub master_recycled_cuts: usize,
    /// Add the exact separable minorant `½rᵀr − Σ z_i (h_i − λ a_i)` to the
    /// master. Without it the master holds gradient cuts only, which are weak
    /// when `γ‖M_i‖² ≫ 1`.
    pub separable_cut: bool,
    pub max_iterations: usize,
}

impl Default for BlockConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            bnb: BnBConfig {
                rel_gap_tol: 1e-9,
                node_limit: 2000,
                ..Default::default()
            },
            pool_cap: 200,
            master_recycled_cuts: 32,
            separable_cut: true,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Counters {
    pub block_updates: usize,
    pub ilp_solves: usize,
    pub bnb_nodes: usize,
    pub dp_certificates: usize,
    pub recycled_cuts: usize,
    pub recycle_checks: usize,
    pub max_recycle_discrepancy: f64,
    pub max_block_increase: f64,
    pub sweeps: usize,
}

impl Counters {
    fn absorb(&mut self, other: &Counters) {
        self.block_updates += other.block_updates;
        self.ilp_solves += other.ilp_solves;
        self.bnb_nodes += other.bnb_nodes;
        self.dp_certificates += other.dp_certificates;
        self.recycled_cuts += other.recycled_cuts;
        self.recycle_checks += other.recycle_checks;
        self.max_recycle_discrepancy = self.max_recycle_discrepancy.max(other.max_recycle_discrepancy);
        self.max_block_increase = self.max_block_increase.max(other.max_block_increase);
        self.sweeps += other.sweeps;
    }
}

/// Visited supports of one tree with their factorizations, FIFO-capped.
#[derive(Debug, Clone, Default)]
pub struct BlockPool {
    entries: VecDeque<(Vec<usize>, Arc<SupportFactorization>)>,
    keys: HashSet<Vec<usize>>,
    cap: usize,
}

impl BlockPool {
    pub fn new(cap: usize) -> Self {
        Self {
            cap: cap.max(1),
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, support: &[usize]) -> Option<Arc<SupportFactorization>> {
        if !self.keys.contains(support) {
            return None;
        }
        self.entries
            .iter()
            .find(|(s, _)| s == support)
            .map(|(_, f)| f.clone())
    }

    pub fn insert(&mut self, support: Vec<usize>, fact: Arc<SupportFactorization>) {
        if self.keys.contains(&support) {
            return;
        }
        if self.entries.len() >= self.cap {
            if let Some((old, _)) = self.entries.pop_front() {
                self.keys.remove(&old);
            }
        }
        self.keys.insert(support.clone());
        self.entries.push_back((support, fact));
    }
}

/// Per-call switches for a block update.
#[derive(Debug, Clone, Copy)]
pub struct BlockOptions {
    pub recycle: bool,
    /// Recompute every recycled cut from scratch and record the discrepancy.
    pub verify_recycling: bool,
}

impl Default for BlockOptions {
    fn default() -> Self {
        Self {
            recycle: true,
            verify_recycling: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BlockSolution {
    pub support: Vec<usize>,
    pub weights: Vec<f64>,
    /// Block objective `q_r(z) + λ aᵀz` at the returned support.
    pub objective: f64,
}

/// Residual-specific data shared by every cut of one block update.
struct BlockContext<'a> {
    rs: &'a RuleSpace,
    tree: usize,
    start: usize,
    len: usize,
    r: &'a [f64],
    dots: Vec<f64>,
    rr: f64,
    lambda: f64,
    attrs: &'a [u32],
}

impl BlockContext<'_> {
    /// Cut at `support` from a cached factor. `A` never changes with the residual;
    /// the cut needs `u = M_Sᵀ r` (read off the tree dots), one solve, and
    /// `M_iᵀ res = M_iᵀ r − Σ_a (M_iᵀ M_a) w_a`, where only nested pairs of the
    /// same tree have nonzero inner products.
    fn cut(&self, fact: &SupportFactorization) -> (Cut, Vec<f64>) {
        let support = fact.support();
        let u: Vec<f64> = support.iter().map(|&i| self.dots[i - self.start]).collect();
        let w = fact.solve(&u);
        let uw: f64 = u.iter().zip(&w).map(|(a, b)| a * b).sum();
        let linear: f64 = support
            .iter()
            .map(|&i| self.lambda * f64::from(self.attrs[i]))
            .sum();
        let gamma = fact.gamma();
        let gradient = (0..self.len)
            .map(|k| {
                let i = self.start + k;
                let mut e = self.dots[k];
                for (&s, &ws) in support.iter().zip(&w) {
                    if s == i || self.rs.is_ancestor(s, i) || self.rs.is_ancestor(i, s) {
                        e -= self.rs.cross(i, s) * ws;
                    }
                }
                -0.5 * gamma * e * e + self.lambda * f64::from(self.attrs[i])
            })
            .collect();
        let cut = Cut {
            value: 0.5 * (self.rr - uw) + linear,
            gradient,
            coords: self.start..self.start + self.len,
            origin: support.iter().map(|&i| (i, 1.0)).collect(),
        };
        (cut, w)
    }

    fn fresh_cut(&self, support: &[usize], gamma: f64) -> Result<Cut> {
        let fact = SupportFactorization::new(self.rs, gamma, support)?;
        Ok(cut_from_factorization(
            self.rs,
            &fact,
            self.r,
            self.start..self.start + self.len,
            self.lambda,
            self.attrs,
        ))
    }

    fn local_parents(&self) -> Vec<Option<usize>> {
        (self.start..self.start + self.len)
            .map(|i| {
                self.rs
                    .column(i)
                    .ancestors
                    .last()
                    .map(|&a| a - self.start)
            })
            .collect()
    }

    fn tree(&self) -> usize {
        self.tree
    }
}

fn to_master(cut: &Cut) -> (f64, Vec<f64>) {
    (cut.intercept(), cut.gradient.clone())
}

/// Exactly minimizes `q_r(z) + λ aᵀz` over antichains of tree `t`.
#[allow(clippy::too_many_arguments)]
pub fn block_solve(
    rs: &RuleSpace,
    tree: usize,
    r: &[f64],
    lambda: f64,
    gamma: f64,
    scheme: AttributeScheme,
    pool: &mut BlockPool,
    warm: &[usize],
    cfg: &BlockConfig,
    opts: BlockOptions,
    counters: &mut Counters,
) -> Result<BlockSolution> {
    let attrs = rs.attributes(scheme);
    block_solve_with(rs, tree, r, lambda, gamma, &attrs, pool, warm, cfg, opts, counters)
}

#[allow(clippy::too_many_arguments)]
fn block_solve_with(
    rs: &RuleSpace,
    tree: usize,
    r: &[f64],
    lambda: f64,
    gamma: f64,
    attrs: &[u32],
    pool: &mut BlockPool,
    warm: &[usize],
    cfg: &BlockConfig,
    opts: BlockOptions,
    counters: &mut Counters,
) -> Result<BlockSolution> {
    if r.len() != rs.n_rows() {
        return Err(Error::Dimension {
            expected: rs.n_rows(),
            found: r.len(),
        });
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be nonnegative, got {lambda}")));
    }
    let range = rs.tree_range(tree);
    if warm.iter().any(|i| !range.contains(i)) || !rs.is_antichain(warm) {
        return Err(Error::InvalidArgument(format!(
            "warm support is not an antichain of tree {tree}"
        )));
    }
    let ctx = BlockContext {
        rs,
        tree,
        start: range.start,
        len: range.len(),
        r,
        dots: rs.tree_dots(tree, r),
        rr: r.iter().map(|x| x * x).sum(),
        lambda,
        attrs,
    };
    let tol = |ub: f64| cfg.tol * ub.abs().max(1.0);
    let factor = |pool: &BlockPool, s: &[usize]| -> Result<Arc<SupportFactorization>> {
        match pool.get(s) {
            Some(f) => Ok(f),
            None => Ok(Arc::new(SupportFactorization::new(rs, gamma, s)?)),
        }
    };

    let mut warm_sorted = warm.to_vec();
    warm_sorted.sort_unstable();
    let f0 = factor(pool, &warm_sorted)?;
    let (cut0, w0) = ctx.cut(&f0);
    let mut upper = cut0.value;
    let mut best = (warm_sorted.clone(), w0);

    // One cut: its minimum over antichains is a tree DP.
    let neg: Vec<f64> = cut0.gradient.iter().map(|g| -g).collect();
    let parents = ctx.local_parents();
    let (gain, dp_sel) = max_weight_antichain(&parents, &neg);
    let dp_bound = cut0.intercept() - gain;
    // Antichain columns of one tree have disjoint rows, so on binary antichains
    // the block objective is ½rᵀr − Σ z_i (h_i − λ a_i) exactly.
    let sep: Vec<f64> = (0..ctx.len)
        .map(|k| {
            let i = ctx.start + k;
            let b = ctx.dots[k];
            0.5 * b * b / (1.0 / gamma + rs.cross(i, i)) - lambda * f64::from(attrs[i])
        })
        .collect();
    let (sep_gain, sep_sel) = max_weight_antichain(&parents, &sep);
    let exact = 0.5 * ctx.rr - sep_gain;
    if dp_bound.max(exact) >= upper - tol(upper) {
        counters.dp_certificates += 1;
        if opts.recycle {
            pool.insert(warm_sorted, f0);
        }
        return Ok(BlockSolution {
            support: best.0,
            weights: best.1,
            objective: upper,
        });
    }

    let mut master = MasterProblem::new(parents)?.with_floor(0.0);
    let (c, g) = to_master(&cut0);
    master.add_cut(c, g)?;
    let mut visited: HashSet<Vec<usize>> = HashSet::new();
    visited.insert(warm_sorted.clone());

    let mut recycled_any = false;
    if opts.recycle {
        let cached: Vec<(Vec<usize>, Arc<SupportFactorization>)> = pool
            .entries
            .iter()
            .filter(|(s, _)| *s != warm_sorted)
            .cloned()
            .collect();
        let mut recycled = Vec::with_capacity(cached.len());
        for (s, f) in cached {
            let (cut, w) = ctx.cut(&f);
            counters.recycled_cuts += 1;
            if opts.verify_recycling {
                let fresh = ctx.fresh_cut(&s, gamma)?;
                counters.recycle_checks += 1;
                counters.max_recycle_discrepancy =
                    counters.max_recycle_discrepancy.max(cut.max_rel_diff(&fresh));
            }
            if cut.value < upper {
                upper = cut.value;
                best = (s.clone(), w);
            }
            visited.insert(s);
            recycled.push(cut);
        }
        // Cuts taken near the incumbent are the ones likely to bind.
        recycled.sort_by(|a, b| a.value.total_cmp(&b.value));
        for cut in recycled.iter().take(cfg.master_recycled_cuts) {
            let (c, g) = to_master(cut);
            master.add_cut(c, g)?;
            recycled_any = true;
        }
        pool.insert(warm_sorted, f0);
    }

    let mut lower = exact;
    let mut first = Some(dp_sel);
    let mut certified = upper - lower <= tol(upper);
    if !certified && cfg.separable_cut {
        // The separable minorant dominates every gradient cut on binary
        // antichains, so the master's minimizer is its DP optimum.
        counters.ilp_solves += 1;
        let support: Vec<usize> = (0..ctx.len)
            .filter(|&k| sep_sel[k])
            .map(|k| ctx.start + k)
            .collect();
        let f = factor(pool, &support)?;
        let (cut, w) = ctx.cut(&f);
        if cut.value < upper {
            upper = cut.value;
            best = (support.clone(), w);
        }
        if opts.recycle {
            pool.insert(support, f);
        }
        certified = true;
    }
    for _ in 0..cfg.max_iterations {
        if certified {
            break;
        }
        counters.ilp_solves += 1;
        let z: Vec<bool> = match first.take() {
            // Without recycled cuts the first master is the single-cut DP above.
            Some(sel) if !recycled_any => {
                lower = lower.max(dp_bound);
                sel
            }
            _ => {
                let sol = match bnb_solve(&master, &cfg.bnb) {
                    Ok(sol) => sol,
                    Err(e) => {
                        log::debug!("block {} master failed: {e}", ctx.tree());
                        break;
                    }
                };
                counters.bnb_nodes += sol.nodes;
                lower = lower.max(sol.bound);
                sol.z
            }
        };
        if upper - lower <= tol(upper) {
            certified = true;
            break;
        }
        let support: Vec<usize> = (0..ctx.len)
            .filter(|&k| z[k])
            .map(|k| ctx.start + k)
            .collect();
        if !visited.insert(support.clone()) {
            break;
        }
        let f = factor(pool, &support)?;
        let (cut, w) = ctx.cut(&f);
        if cut.value < upper {
            upper = cut.value;
            best = (support.clone(), w);
        }
        let (c, g) = to_master(&cut);
        master.add_cut(c, g)?;
        if opts.recycle {
            pool.insert(support, f);
        }
        certified = upper - lower <= tol(upper);
    }
    if !certified {
        // Iteration budget spent: fall back to the separable optimum.
        let support: Vec<usize> = (0..ctx.len)
            .filter(|&k| sep_sel[k])
            .map(|k| ctx.start + k)
            .collect();
        let f = factor(pool, &support)?;
        let (cut, w) = ctx.cut(&f);
        if cut.value < upper {
            upper = cut.value;
            best = (support.clone(), w);
        }
        if opts.recycle {
            pool.insert(support, f);
        }
    }
    log::trace!(
        "block {} done: objective {upper:.10e}, cuts {}",
        ctx.tree(),
        master.num_cuts()
    );
    Ok(BlockSolution {
        support: best.0,
        weights: best.1,
        objective: upper,
    })
}

#[derive(Debug, Clone)]
pub struct CbcdOptions {
    pub gamma: f64,
    pub scheme: AttributeScheme,
    /// Relative tolerance on sweep-to-sweep improvement.
    pub tol: f64,
    pub max_sweeps: usize,
    pub active_set: bool,
    pub n_warm: usize,
    pub recycle: bool,
    pub warm_start: bool,
    pub verify_recycling: bool,
    pub refresh_every: usize,
    pub block: BlockConfig,
}

impl Default for CbcdOptions {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            scheme: AttributeScheme::RuleWeight,
            tol: 1e-8,
            max_sweeps: 100,
            active_set: true,
            n_warm: 2,
            recycle: true,
            warm_start: true,
            verify_recycling: false,
            refresh_every: 10,
            block: BlockConfig::default(),
        }
    }
}

/// Per-tree selections, the running prediction and per-tree cut pools.
#[derive(Debug, Clone)]
pub struct CbcdState {
    pub supports: Vec<Vec<usize>>,
    pub weights: Vec<Vec<f64>>,
    pub prediction: Vec<f64>,
    /// Penalized objective at the current state.
    pub objective: f64,
    pub lambda: f64,
    pub pools: Vec<BlockPool>,
    pub counters: Counters,
    pub converged: bool,
    /// Objective after every sweep of the last fit.
    pub sweep_trace: Vec<f64>,
}

impl CbcdState {
    pub fn new(rs: &RuleSpace, pool_cap: usize) -> Self {
        let t = rs.num_trees();
        Self {
            supports: vec![Vec::new(); t],
            weights: vec![Vec::new(); t],
            prediction: vec![0.0; rs.n_rows()],
            objective: f64::NAN,
            lambda: f64::NAN,
            pools: (0..t).map(|_| BlockPool::new(pool_cap)).collect(),
            counters: Counters::default(),
            converged: false,
            sweep_trace: Vec::new(),
        }
    }

    fn loss(&self, v: &[f64]) -> f64 {
        0.5 * v
            .iter()
            .zip(&self.prediction)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
    }

    fn ridge(&self, gamma: f64) -> f64 {
        0.5 / gamma
            * self
                .weights
                .iter()
                .flatten()
                .map(|w| w * w)
                .sum::<f64>()
    }

    fn attr_total(&self, attrs: &[u32]) -> f64 {
        self.supports
            .iter()
            .flatten()
            .map(|&i| f64::from(attrs[i]))
            .sum()
    }

    fn refresh_prediction(&mut self, rs: &RuleSpace) {
        self.prediction.iter_mut().for_each(|p| *p = 0.0);
        for (s, w) in self.supports.iter().zip(&self.weights) {
            for (&i, &wi) in s.iter().zip(w) {
                rs.add_column(i, wi, &mut self.prediction);
            }
        }
    }

    /// Penalized objective recomputed from the supports and weights alone.
    pub fn recompute_objective(&self, rs: &RuleSpace, v: &[f64], gamma: f64, attrs: &[u32]) -> f64 {
        let mut pred = vec![0.0; rs.n_rows()];
        for (s, w) in self.supports.iter().zip(&self.weights) {
            for (&i, &wi) in s.iter().zip(w) {
                rs.add_column(i, wi, &mut pred);
            }
        }
        let loss: f64 = 0.5 * v.iter().zip(&pred).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        loss + self.ridge(gamma) + self.lambda * self.attr_total(attrs)
    }

    /// Combined selection; `objective` excludes the `λ` term.
    pub fn selection(&self, rs: &RuleSpace, v: &[f64], gamma: f64, scheme: AttributeScheme) -> Selection {
        let support: Vec<usize> = self.supports.iter().flatten().copied().collect();
        let weights: Vec<f64> = self.weights.iter().flatten().copied().collect();
        let attribute_sum = rs.attribute_sum(scheme, &support);
        Selection {
            objective: self.loss(v) + self.ridge(gamma),
            support,
            weights,
            attribute_sum,
        }
    }
}

struct Fit<'a> {
    rs: &'a RuleSpace,
    v: Vec<f64>,
    attrs: Vec<u32>,
    opts: &'a CbcdOptions,
    lambda: f64,
}

impl Fit<'_> {
    fn objective(&self, st: &CbcdState) -> f64 {
        st.loss(&self.v) + st.ridge(self.opts.gamma) + self.lambda * st.attr_total(&self.attrs)
    }

    fn update(&self, st: &mut CbcdState, t: usize) -> Result<()> {
        let before = st.objective;
        let mut r: Vec<f64> = self.v.iter().zip(&st.prediction).map(|(a, b)| a - b).collect();
        for (&i, &w) in st.supports[t].iter().zip(&st.weights[t]) {
            self.rs.add_column(i, w, &mut r);
        }
        let sol = block_solve_with(
            self.rs,
            t,
            &r,
            self.lambda,
            self.opts.gamma,
            &self.attrs,
            &mut st.pools[t],
            &st.supports[t],
            &self.opts.block,
            BlockOptions {
                recycle: self.opts.recycle,
                verify_recycling: self.opts.verify_recycling,
            },
            &mut st.counters,
        )?;
        for (p, (a, b)) in st.prediction.iter_mut().zip(self.v.iter().zip(&r)) {
            *p = a - b;
        }
        for (&i, &w) in sol.support.iter().zip(&sol.weights) {
            self.rs.add_column(i, w, &mut st.prediction);
        }
        st.supports[t] = sol.support;
        st.weights[t] = sol.weights;
        st.objective = self.objective(st);
        st.counters.block_updates += 1;
        let delta = st.objective - before;
        if delta > st.counters.max_block_increase {
            st.counters.max_block_increase = delta;
        }
        Ok(())
    }

    fn sweep(&self, st: &mut CbcdState, trees: &[usize]) -> Result<f64> {
        let before = st.objective;
        for &t in trees {
            self.update(st, t)?;
        }
        st.counters.sweeps += 1;
        st.sweep_trace.push(st.objective);
        if self.opts.refresh_every > 0 && st.counters.sweeps % self.opts.refresh_every == 0 {
            st.refresh_prediction(self.rs);
            st.objective = self.objective(st);
        }
        Ok(before - st.objective)
    }

    fn small(&self, improvement: f64, st: &CbcdState) -> bool {
        improvement < self.opts.tol * st.objective.abs().max(1.0)
    }
}

fn prepare<'a>(
    rs: &'a RuleSpace,
    y: &[f64],
    lambda: f64,
    opts: &'a CbcdOptions,
    warm: Option<CbcdState>,
) -> Result<(Fit<'a>, CbcdState)> {
    if y.len() != rs.n_rows() {
        return Err(Error::Dimension {
            expected: rs.n_rows(),
            found: y.len(),
        });
    }
    if !(opts.gamma > 0.0 && opts.gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {}", opts.gamma)));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda must be nonnegative, got {lambda}")));
    }
    let fit = Fit {
        rs,
        v: rs.target(y),
        attrs: rs.attributes(opts.scheme),
        opts,
        lambda,
    };
    let mut st = warm.unwrap_or_else(|| CbcdState::new(rs, opts.block.pool_cap));
    if st.supports.len() != rs.num_trees() {
        return Err(Error::InvalidArgument("warm state belongs to another rule space".into()));
    }
    if !opts.warm_start {
        st.supports.iter_mut().for_each(Vec::clear);
        st.weights.iter_mut().for_each(Vec::clear);
        st.prediction.iter_mut().for_each(|p| *p = 0.0);
    }
    st.lambda = lambda;
    st.converged = false;
    st.sweep_trace.clear();
    st.objective = fit.objective(&st);
    Ok((fit, st))
}

/// Cyclic block coordinate descent over all trees in index order.
pub fn cbcd_fit(
    rs: &RuleSpace,
    y: &[f64],
    lambda: f64,
    opts: &CbcdOptions,
    warm: Option<CbcdState>,
) -> Result<CbcdState> {
    let (fit, mut st) = prepare(rs, y, lambda, opts, warm)?;
    let all: Vec<usize> = (0..rs.num_trees()).collect();
    for _ in 0..opts.max_sweeps {
        let imp = fit.sweep(&mut st, &all)?;
        if fit.small(imp, &st) {
            st.converged = true;
            break;
        }
    }
    if !st.converged {
        log::warn!("cbcd hit the sweep limit at lambda={lambda}");
    }
    Ok(st)
}

/// Block coordinate descent that cycles over trees with nonempty selections
/// after a few full sweeps, refreshing the active set with a full sweep until
/// a full sweep no longer improves.
pub fn active_set_fit(
    rs: &RuleSpace,
    y: &[f64],
    lambda: f64,
    opts: &CbcdOptions,
    warm: Option<CbcdState>,
) -> Result<CbcdState> {
    let (fit, mut st) = prepare(rs, y, lambda, opts, warm)?;
    let all: Vec<usize> = (0..rs.num_trees()).collect();
    let mut sweeps = 0;
    for _ in 0..opts.n_warm.max(1) {
        let imp = fit.sweep(&mut st, &all)?;
        sweeps += 1;
        if fit.small(imp, &st) {
            st.converged = true;
            return Ok(st);
        }
    }
    while sweeps < opts.max_sweeps {
        let active: Vec<usize> = all
            .iter()
            .copied()
            .filter(|&t| !st.supports[t].is_empty())
            .collect();
        while sweeps < opts.max_sweeps {
            let imp = fit.sweep(&mut st, &active)?;
            sweeps += 1;
            if fit.small(imp, &st) {
                break;
            }
        }
        if sweeps >= opts.max_sweeps {
            break;
        }
        let imp = fit.sweep(&mut st, &all)?;
        sweeps += 1;
        if fit.small(imp, &st) {
            st.converged = true;
            break;
        }
    }
    if !st.converged {
        log::warn!("active-set cbcd hit the sweep limit at lambda={lambda}");
    }
    Ok(st)
}

/// `n` log-spaced values from `hi` down to `lo`.
pub fn lambda_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && n >= 1) || (n > 1 && hi == lo) {
        return Err(Error::InvalidArgument(format!(
            "invalid lambda grid {lo}:{hi}:{n}"
        )));
    }
    if n == 1 {
        return Ok(vec![hi]);
    }
    let (a, b) = (hi.log10(), lo.log10());
    Ok((0..n)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64))
        .collect())
}

#[derive(Debug, Clone)]
pub struct PathConfig {
    /// Strictly monotone; traversed in the given order.
    pub lambdas: Vec<f64>,
    pub cbcd: CbcdOptions,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            lambdas: lambda_grid(1.0, 1e3, 50).unwrap(),
            cbcd: CbcdOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PathPoint {
    pub lambda: f64,
    pub selection: Selection,
    /// Loss plus ridge term, without the `λ` term.
    pub objective: f64,
    pub penalized_objective: f64,
    pub attribute_sum: u64,
    pub num_rules: usize,
    pub sum_depth: usize,
    pub mean_depth: f64,
    pub num_features: usize,
    pub valid_r2: Option<f64>,
    pub ilp_solves: usize,
    pub block_updates: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct PathResult {
    pub points: Vec<PathPoint>,
    pub scheme: AttributeScheme,
    pub gamma: f64,
    /// Objective of the empty selection, `½‖y − base‖²`.
    pub null_objective: f64,
    pub counters: Counters,
}

fn check_grid(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::InvalidArgument("empty lambda grid".into()));
    }
    if lambdas.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
        return Err(Error::InvalidArgument("lambda values must be finite and nonnegative".into()));
    }
    let dec = lambdas.windows(2).all(|w| w[0] > w[1]);
    let inc = lambdas.windows(2).all(|w| w[0] < w[1]);
    if !(dec || inc) {
        return Err(Error::InvalidArgument("lambda grid must be strictly monotone".into()));
    }
    Ok(())
}

/// Warm-started regularization path; `valid` is scored by each pruned model.
pub fn fit_path(
    rs: &RuleSpace,
    y: &[f64],
    cfg: &PathConfig,
    valid: Option<&Dataset>,
) -> Result<PathResult> {
    check_grid(&cfg.lambdas)?;
    let opts = &cfg.cbcd;
    let v = rs.target(y);
    let attrs = rs.attributes(opts.scheme);
    let mut state: Option<CbcdState> = None;
    let mut points = Vec::with_capacity(cfg.lambdas.len());
    let mut counters = Counters::default();
    for &lambda in &cfg.lambdas {
        let warm = state.take().map(|mut s| {
            s.counters = Counters::default();
            s
        });
        let st = if opts.active_set {
            active_set_fit(rs, y, lambda, opts, warm)?
        } else {
            cbcd_fit(rs, y, lambda, opts, warm)?
        };
        debug_assert!({
            let re = st.recompute_objective(rs, &v, opts.gamma, &attrs);
            (re - st.objective).abs() <= 1e-8 * re.abs().max(1.0)
        });
        let selection = st.selection(rs, &v, opts.gamma, opts.scheme);
        let valid_r2 = match valid {
            Some(ds) => {
                let model = rs.to_rule_model(
                    &selection,
                    metadata(opts.scheme, None, Some(lambda), opts.gamma, "cbcd", 0.0),
                );
                Some(r2(ds.response(), &model.predict(ds)?)?)
            }
            None => None,
        };
        points.push(PathPoint {
            lambda,
            objective: selection.objective,
            penalized_objective: st.objective,
            attribute_sum: selection.attribute_sum,
            num_rules: selection.len(),
            sum_depth: rs.sum_depth(&selection.support),
            mean_depth: rs.mean_depth(&selection.support),
            num_features: rs.features_used(&selection.support),
            valid_r2,
            ilp_solves: st.counters.ilp_solves,
            block_updates: st.counters.block_updates,
            converged: st.converged,
            selection,
        });
        counters.absorb(&st.counters);
        log::info!(
            "lambda={lambda:.4e} rules={} objective={:.6e}",
            points.last().unwrap().num_rules,
            st.objective
        );
        state = Some(st);
    }
    Ok(PathResult {
        points,
        scheme: opts.scheme,
        gamma: opts.gamma,
        null_objective: 0.5 * v.iter().map(|x| x * x).sum::<f64>(),
        counters,
    })
}

/// The path point with the largest attribute sum not above `k` (ties: lower
/// objective). Falls back to the empty selection.
pub fn select_k(path: &PathResult, k: u64) -> Selection {
    path.points
        .iter()
        .filter(|p| p.attribute_sum <= k && !p.selection.is_empty())
        .min_by(|a, b| {
            b.attribute_sum
                .cmp(&a.attribute_sum)
                .then(a.objective.total_cmp(&b.objective))
        })
        .map(|p| p.selection.clone())
        .unwrap_or_else(|| Selection::empty(path.null_objective))
}

pub fn metadata(
    scheme: AttributeScheme,
    budget: Option<f64>,
    lambda: Option<f64>,
    gamma: f64,
    solver: &str,
    gap: f64,
) -> ModelMetadata {
    ModelMetadata {
        scheme: scheme.name().to_string(),
        budget,
        lambda,
        gamma,
        solver: solver.to_string(),
        gap,
    }
}
