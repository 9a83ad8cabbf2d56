//! Woodbury-form evaluation of the ridge-profiled objective.
//!
//! For a support `S` with (optionally scaled) columns `B = M_S diag(s)`, the
//! objective `½ vᵀ(I + γ B Bᵀ)⁻¹ v` is evaluated through the small system
//! `A = I/γ + BᵀB`:
//!
//! ```text
//! q   = ½ (vᵀv − uᵀ A⁻¹ u),   u = Bᵀ v
//! res = v − B A⁻¹ u           = (I + γ B Bᵀ)⁻¹ v
//! ∂q/∂z_i = −γ/2 (M_iᵀ res)²
//! ```
//!
//! `A` is factorized once per support and cached, so re-evaluating cuts for a
//! new target vector only costs triangular solves.

use std::collections::HashMap;
use std::ops::Range;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rulespace::{AttributeScheme, RuleSpace};

/// Cholesky factor of `I/γ + BᵀB` for one support.
#[derive(Debug, Clone)]
pub struct SupportFactorization {
    support: Vec<usize>,
    scales: Vec<f64>,
    gamma: f64,
    /// Lower-triangular factor, row-major `k × k`.
    chol: Vec<f64>,
}

impl SupportFactorization {
    /// Factorization for a binary support (unit column scales).
    pub fn new(rs: &RuleSpace, gamma: f64, support: &[usize]) -> Result<Self> {
        Self::with_scales(rs, gamma, support, &vec![1.0; support.len()])
    }

    /// Factorization for columns `scales[a] * M_{support[a]}`; fractional
    /// points use `scales = sqrt(z)`.
    pub fn with_scales(
        rs: &RuleSpace,
        gamma: f64,
        support: &[usize],
        scales: &[f64],
    ) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
        }
        let k = support.len();
        let mut gram = vec![0.0; k * k];
        for a in 0..k {
            for b in 0..=a {
                let mut v = scales[a] * scales[b] * rs.cross(support[a], support[b]);
                if a == b {
                    v += 1.0 / gamma;
                }
                gram[a * k + b] = v;
                gram[b * k + a] = v;
            }
        }
        let chol = cholesky(&gram, k)?;
        Ok(Self {
            support: support.to_vec(),
            scales: scales.to_vec(),
            gamma,
            chol,
        })
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.support.len()
    }

    /// Solves `A x = b` with the cached factor.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let k = self.dim();
        let l = &self.chol;
        let mut x = b.to_vec();
        for i in 0..k {
            let mut s = x[i];
            for j in 0..i {
                s -= l[i * k + j] * x[j];
            }
            x[i] = s / l[i * k + i];
        }
        for i in (0..k).rev() {
            let mut s = x[i];
            for j in i + 1..k {
                s -= l[j * k + i] * x[j];
            }
            x[i] = s / l[i * k + i];
        }
        x
    }

    /// Projects `v`: returns the objective value (without any linear penalty),
    /// the reduced residual and the ridge weights on the scaled columns.
    pub fn project(&self, rs: &RuleSpace, v: &[f64]) -> Projection {
        let u: Vec<f64> = self
            .support
            .iter()
            .zip(&self.scales)
            .map(|(&i, &s)| s * rs.dot(i, v))
            .collect();
        let w = self.solve(&u);
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let uw: f64 = u.iter().zip(&w).map(|(a, b)| a * b).sum();
        let mut residual = v.to_vec();
        for ((&i, &s), &wa) in self.support.iter().zip(&self.scales).zip(&w) {
            rs.add_column(i, -s * wa, &mut residual);
        }
        Projection {
            value: 0.5 * (vv - uw),
            residual,
            scaled_weights: w,
        }
    }

    /// Objective decrease from appending column `j` (unit scale) to this
    /// support, given `residual = project(v).residual`.
    pub fn addition_gain(&self, rs: &RuleSpace, residual: &[f64], j: usize) -> f64 {
        let u: Vec<f64> = self
            .support
            .iter()
            .zip(&self.scales)
            .map(|(&i, &s)| s * rs.cross(i, j))
            .collect();
        let au = self.solve(&u);
        let schur = 1.0 / self.gamma + rs.column(j).norm_sq()
            - u.iter().zip(&au).map(|(a, b)| a * b).sum::<f64>();
        let b = rs.dot(j, residual);
        0.5 * b * b / schur
    }
}

#[derive(Debug, Clone)]
pub struct Projection {
    pub value: f64,
    pub residual: Vec<f64>,
    pub scaled_weights: Vec<f64>,
}

fn cholesky(a: &[f64], k: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let mut s = a[i * k + j];
            for p in 0..j {
                s -= l[i * k + p] * l[j * k + p];
            }
            if i == j {
                let scale = a[i * k + i].abs().max(f64::MIN_POSITIVE);
                if !(s > 1e-14 * scale) {
                    return Err(Error::Singular(s));
                }
                l[i * k + i] = s.sqrt();
            } else {
                l[i * k + j] = s / l[j * k + j];
            }
        }
    }
    Ok(l)
}

/// `½ vᵀ(I + γ M_S M_Sᵀ)⁻¹ v` for a binary support.
pub fn objective_q(rs: &RuleSpace, gamma: f64, support: &[usize], v: &[f64]) -> Result<f64> {
    Ok(SupportFactorization::new(rs, gamma, support)?
        .project(rs, v)
        .value)
}

fn check_len(rs: &RuleSpace, v: &[f64]) -> Result<()> {
    if v.len() != rs.n_rows() {
        return Err(Error::Dimension {
            expected: rs.n_rows(),
            found: v.len(),
        });
    }
    Ok(())
}

/// `∂q/∂z_i = −γ/2 (M_iᵀ res)²` for every node.
pub fn subgradient_q(rs: &RuleSpace, gamma: f64, support: &[usize], v: &[f64]) -> Result<Vec<f64>> {
    check_len(rs, v)?;
    let fact = SupportFactorization::new(rs, gamma, support)?;
    let res = fact.project(rs, v).residual;
    Ok(rs
        .all_dots(&res)
        .into_iter()
        .map(|d| -0.5 * gamma * d * d)
        .collect())
}

/// Block objective `q_r(z^t)`: the Woodbury value on tree `t`'s columns plus
/// `λ Σ a_i z_i`.
pub fn block_objective_qr(
    rs: &RuleSpace,
    tree: usize,
    gamma: f64,
    lambda: f64,
    scheme: AttributeScheme,
    support: &[usize],
    r: &[f64],
) -> Result<f64> {
    check_len(rs, r)?;
    let range = rs.tree_range(tree);
    if let Some(&bad) = support.iter().find(|i| !range.contains(i)) {
        return Err(Error::InvalidArgument(format!(
            "node {bad} does not belong to tree {tree}"
        )));
    }
    let q = objective_q(rs, gamma, support, r)?;
    Ok(q + lambda * rs.attribute_sum(scheme, support) as f64)
}

/// Ridge weights `(I/γ + M_SᵀM_S)⁻¹ M_Sᵀ v`.
pub fn fit_weights(rs: &RuleSpace, gamma: f64, support: &[usize], v: &[f64]) -> Result<Vec<f64>> {
    check_len(rs, v)?;
    let fact = SupportFactorization::new(rs, gamma, support)?;
    let u: Vec<f64> = support.iter().map(|&i| rs.dot(i, v)).collect();
    Ok(fact.solve(&u))
}

/// `½‖v − M_S w‖² + (1/2γ)‖w‖²`, evaluated directly.
pub fn primal_objective(
    rs: &RuleSpace,
    gamma: f64,
    support: &[usize],
    weights: &[f64],
    v: &[f64],
) -> f64 {
    let mut res = v.to_vec();
    for (&i, &w) in support.iter().zip(weights) {
        rs.add_column(i, -w, &mut res);
    }
    0.5 * res.iter().map(|x| x * x).sum::<f64>()
        + 0.5 / gamma * weights.iter().map(|w| w * w).sum::<f64>()
}

/// Affine minorant `ν ≥ value + gradientᵀ(z − origin)` of a convex objective.
///
/// The gradient is dense over `coords` (a contiguous range of global node
/// indices: one tree for block cuts, every node for global cuts).
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub coords: Range<usize>,
    /// Nonzero coordinates of the origin as (global index, value).
    pub origin: Vec<(usize, f64)>,
}

impl Cut {
    /// `value − gradientᵀ origin`
    pub fn intercept(&self) -> f64 {
        self.value
            - self
                .origin
                .iter()
                .map(|&(i, z)| self.gradient[i - self.coords.start] * z)
                .sum::<f64>()
    }

    /// Cut value at a dense point over `coords`.
    pub fn eval(&self, z: &[f64]) -> f64 {
        self.intercept()
            + self
                .gradient
                .iter()
                .zip(z)
                .map(|(g, x)| g * x)
                .sum::<f64>()
    }

    /// Cut value at a binary point given by its support (global indices).
    pub fn eval_support(&self, support: &[usize]) -> f64 {
        self.intercept()
            + support
                .iter()
                .map(|&i| self.gradient[i - self.coords.start])
                .sum::<f64>()
    }

    /// Largest entrywise difference, each scaled by `max(1, |other|)`.
    pub fn max_rel_diff(&self, other: &Cut) -> f64 {
        let d = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
        self.gradient
            .iter()
            .zip(&other.gradient)
            .map(|(&a, &b)| d(a, b))
            .fold(d(self.value, other.value), f64::max)
    }

    pub fn max_abs_diff(&self, other: &Cut) -> f64 {
        let g = self
            .gradient
            .iter()
            .zip(&other.gradient)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        g.max((self.value - other.value).abs())
    }
}

/// Builds the cut of `q(z) + λ aᵀz` at the point encoded by `fact` (support and
/// scales, z = scale²) for target `v`, with gradient over `coords`.
pub fn cut_from_factorization(
    rs: &RuleSpace,
    fact: &SupportFactorization,
    v: &[f64],
    coords: Range<usize>,
    lambda: f64,
    attrs: &[u32],
) -> Cut {
    let proj = fact.project(rs, v);
    let gamma = fact.gamma();
    let origin: Vec<(usize, f64)> = fact
        .support
        .iter()
        .zip(&fact.scales)
        .map(|(&i, &s)| (i, s * s))
        .collect();
    let linear: f64 = origin
        .iter()
        .map(|&(i, z)| lambda * f64::from(attrs[i]) * z)
        .sum();
    let dots = coords_dots(rs, &coords, &proj.residual);
    let gradient = coords
        .clone()
        .zip(dots)
        .map(|(i, d)| -0.5 * gamma * d * d + lambda * f64::from(attrs[i]))
        .collect();
    Cut {
        value: proj.value + linear,
        gradient,
        coords,
        origin,
    }
}

fn coords_dots(rs: &RuleSpace, coords: &Range<usize>, v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(coords.len());
    for t in 0..rs.num_trees() {
        let tr = rs.tree_range(t);
        if tr.end <= coords.start || tr.start >= coords.end {
            continue;
        }
        let dots = rs.tree_dots(t, v);
        for i in tr.clone() {
            if coords.contains(&i) {
                out.push(dots[i - tr.start]);
            }
        }
    }
    out
}

/// Re-derives the cut at a cached support for a new residual. Only triangular
/// solves against the stored factor are performed.
pub fn recycle_cut(
    rs: &RuleSpace,
    fact: &SupportFactorization,
    new_residual: &[f64],
    coords: Range<usize>,
    lambda: f64,
    attrs: &[u32],
) -> Cut {
    cut_from_factorization(rs, fact, new_residual, coords, lambda, attrs)
}

/// Relaxed objective `½ vᵀ(I + γ M diag(z) Mᵀ)⁻¹ v + λ aᵀz` and its gradient
/// over all nodes, at a fractional point `z ∈ [0,1]^m`.
pub fn relaxed_cut(
    rs: &RuleSpace,
    gamma: f64,
    z: &[f64],
    v: &[f64],
    lambda: f64,
    attrs: &[u32],
) -> Result<Cut> {
    let (support, scales): (Vec<usize>, Vec<f64>) = z
        .iter()
        .enumerate()
        .filter(|&(_, &x)| x > 0.0)
        .map(|(i, &x)| (i, x.sqrt()))
        .unzip();
    let fact = SupportFactorization::with_scales(rs, gamma, &support, &scales)?;
    Ok(cut_from_factorization(rs, &fact, v, 0..rs.m(), lambda, attrs))
}

/// Relaxed objective value only (no linear term).
pub fn relaxed_q(rs: &RuleSpace, gamma: f64, z: &[f64], v: &[f64]) -> Result<f64> {
    let (support, scales): (Vec<usize>, Vec<f64>) = z
        .iter()
        .enumerate()
        .filter(|&(_, &x)| x > 0.0)
        .map(|(i, &x)| (i, x.sqrt()))
        .unzip();
    let fact = SupportFactorization::with_scales(rs, gamma, &support, &scales)?;
    Ok(fact.project(rs, v).value)
}

/// LRU cache of binary-support factorizations keyed by the sorted support.
#[derive(Debug)]
pub struct FactorCache {
    gamma: f64,
    capacity: usize,
    tick: u64,
    entries: HashMap<Vec<usize>, (u64, Arc<SupportFactorization>)>,
    pub hits: u64,
    pub misses: u64,
}

pub const DEFAULT_CACHE_CAPACITY: usize = 4096;

impl FactorCache {
    pub fn new(gamma: f64, capacity: usize) -> Self {
        Self {
            gamma,
            capacity: capacity.max(1),
            tick: 0,
            entries: HashMap::new(),
            hits: 0,
            misses: 0,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, support: &[usize]) -> bool {
        self.entries.contains_key(support)
    }

    /// Returns the cached factorization for a sorted support, building it on a miss.
    pub fn get(&mut self, rs: &RuleSpace, support: &[usize]) -> Result<Arc<SupportFactorization>> {
        debug_assert!(support.windows(2).all(|w| w[0] < w[1]));
        self.tick += 1;
        if let Some(entry) = self.entries.get_mut(support) {
            entry.0 = self.tick;
            self.hits += 1;
            return Ok(entry.1.clone());
        }
        self.misses += 1;
        let fact = Arc::new(SupportFactorization::new(rs, self.gamma, support)?);
        if self.entries.len() >= self.capacity {
            let oldest = self
                .entries
                .iter()
                .min_by_key(|(_, (t, _))| *t)
                .map(|(k, _)| k.clone());
            if let Some(k) = oldest {
                self.entries.remove(&k);
            }
        }
        self.entries
            .insert(support.to_vec(), (self.tick, fact.clone()));
        Ok(fact)
    }
}
