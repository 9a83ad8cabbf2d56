//! Brute-force reference implementations for tests. Deliberately slow and
//! guarded against use on anything but toy instances.

use crate::error::{Error, Result};
use crate::rulespace::{AttributeScheme, RuleSpace};

pub const MAX_ENUM_NODES: usize = 40;
pub const MAX_RIDGE_COLUMNS: usize = 50;
pub const MAX_FD_NODES: usize = 30;
pub const MAX_DENSE_ROWS: usize = 200;
pub const MAX_FOREST_NODES: usize = 24;

fn guard(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::OracleGuard(what.to_string()))
    }
}

/// Every antichain of a forest given by parent pointers, as sorted index lists.
pub fn forest_antichains(parent: &[Option<usize>]) -> Result<Vec<Vec<usize>>> {
    let n = parent.len();
    guard(n <= MAX_FOREST_NODES, "forest too large for enumeration")?;
    let mut out = Vec::new();
    'mask: for mask in 0u32..(1u32 << n) {
        for i in 0..n {
            if mask >> i & 1 == 0 {
                continue;
            }
            let mut cur = parent[i];
            while let Some(p) = cur {
                if mask >> p & 1 == 1 {
                    continue 'mask;
                }
                cur = parent[p];
            }
        }
        out.push((0..n).filter(|&i| mask >> i & 1 == 1).collect());
    }
    Ok(out)
}

/// Antichains of one tree of the rule space (global indices), built by
/// recursion over subtrees: a subtree contributes either its root alone or any
/// combination of its children's antichains.
pub fn tree_antichains(rs: &RuleSpace, t: usize) -> Result<Vec<Vec<usize>>> {
    let range = rs.tree_range(t);
    guard(range.len() <= MAX_ENUM_NODES, "tree too large for enumeration")?;
    fn sub(rs: &RuleSpace, i: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![i]];
        match rs.column(i).children {
            None => out.push(Vec::new()),
            Some((l, r)) => {
                for a in sub(rs, l) {
                    for b in sub(rs, r) {
                        let mut s = a.clone();
                        s.extend(b);
                        out.push(s);
                    }
                }
            }
        }
        out
    }
    let tops: Vec<usize> = range
        .clone()
        .filter(|&i| rs.column(i).parent.is_none())
        .collect();
    let mut acc: Vec<Vec<usize>> = vec![Vec::new()];
    for top in tops {
        let parts = sub(rs, top);
        acc = acc
            .iter()
            .flat_map(|a| {
                parts.iter().map(move |b| {
                    let mut s = a.clone();
                    s.extend(b);
                    s
                })
            })
            .collect();
    }
    for s in &mut acc {
        s.sort_unstable();
    }
    Ok(acc)
}

fn attribute(rs: &RuleSpace, scheme: AttributeScheme, i: usize) -> u64 {
    let c = rs.column(i);
    match scheme {
        AttributeScheme::RuleWeight => 1,
        AttributeScheme::DepthWeight => c.conditions.len() as u64,
        AttributeScheme::FeatureWeight => {
            let mut f: Vec<usize> = c.conditions.iter().map(|c| c.feature).collect();
            f.sort_unstable();
            f.dedup();
            f.len() as u64
        }
    }
}

/// All unions of per-tree antichains whose attribute sum is at most `k`.
pub fn enumerate_feasible_supports(
    rs: &RuleSpace,
    scheme: AttributeScheme,
    k: u64,
) -> Result<Vec<Vec<usize>>> {
    guard(rs.m() <= MAX_ENUM_NODES, "rule space too large for enumeration")?;
    let mut acc: Vec<(Vec<usize>, u64)> = vec![(Vec::new(), 0)];
    for t in 0..rs.num_trees() {
        let parts: Vec<(Vec<usize>, u64)> = tree_antichains(rs, t)?
            .into_iter()
            .map(|s| {
                let a = s.iter().map(|&i| attribute(rs, scheme, i)).sum();
                (s, a)
            })
            .collect();
        let mut next = Vec::new();
        for (s, a) in &acc {
            for (p, b) in &parts {
                if a + b <= k {
                    let mut u = s.clone();
                    u.extend(p);
                    next.push((u, a + b));
                }
            }
        }
        acc = next;
    }
    Ok(acc.into_iter().map(|(s, _)| s).collect())
}

/// Dense column `M_i` of length n.
pub fn dense_column(rs: &RuleSpace, i: usize) -> Vec<f64> {
    let c = rs.column(i);
    let mut col = vec![0.0; rs.n_rows()];
    for &k in &c.rows {
        col[k as usize] = c.mu;
    }
    col
}

/// Gaussian elimination with partial pivoting on a dense square system.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        if a[piv][col].abs() < 1e-300 {
            return Err(Error::Singular(a[piv][col]));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Ok(x)
}

/// Ridge regression by dense normal equations; returns the primal objective
/// `½‖v − Cw‖² + (1/2γ)‖w‖²` and the weights.
pub fn ridge_direct(columns: &[Vec<f64>], gamma: f64, v: &[f64]) -> Result<(f64, Vec<f64>)> {
    guard(columns.len() <= MAX_RIDGE_COLUMNS, "too many columns for the ridge oracle")?;
    let k = columns.len();
    let mut a = vec![vec![0.0; k]; k];
    let mut b = vec![0.0; k];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = columns[i].iter().zip(&columns[j]).map(|(x, y)| x * y).sum();
        }
        a[i][i] += 1.0 / gamma;
        b[i] = columns[i].iter().zip(v).map(|(x, y)| x * y).sum();
    }
    let w = if k == 0 { Vec::new() } else { gauss_solve(a, b)? };
    let mut res = v.to_vec();
    for (c, wi) in columns.iter().zip(&w) {
        for (r, x) in res.iter_mut().zip(c) {
            *r -= wi * x;
        }
    }
    let obj = 0.5 * res.iter().map(|x| x * x).sum::<f64>()
        + 0.5 / gamma * w.iter().map(|x| x * x).sum::<f64>();
    Ok((obj, w))
}

/// Ridge objective of a support against target `v`.
pub fn support_objective(rs: &RuleSpace, gamma: f64, support: &[usize], v: &[f64]) -> Result<f64> {
    let cols: Vec<Vec<f64>> = support.iter().map(|&i| dense_column(rs, i)).collect();
    Ok(ridge_direct(&cols, gamma, v)?.0)
}

/// Exhaustive optimum of the budgeted problem: `(objective, support)`.
pub fn brute_force_exact(
    rs: &RuleSpace,
    v: &[f64],
    gamma: f64,
    scheme: AttributeScheme,
    k: u64,
) -> Result<(f64, Vec<usize>)> {
    let mut best = (f64::INFINITY, Vec::new());
    for s in enumerate_feasible_supports(rs, scheme, k)? {
        let obj = support_objective(rs, gamma, &s, v)?;
        if obj < best.0 {
            best = (obj, s);
        }
    }
    Ok(best)
}

/// Exhaustive optimum of one penalized block: `min ridge(S) + λ Σ a` over the
/// antichains of tree `t`.
pub fn brute_force_block(
    rs: &RuleSpace,
    t: usize,
    r: &[f64],
    lambda: f64,
    gamma: f64,
    scheme: AttributeScheme,
) -> Result<(f64, Vec<usize>)> {
    let mut best = (f64::INFINITY, Vec::new());
    for s in tree_antichains(rs, t)? {
        let a: u64 = s.iter().map(|&i| attribute(rs, scheme, i)).sum();
        let obj = support_objective(rs, gamma, &s, r)? + lambda * a as f64;
        if obj < best.0 {
            best = (obj, s);
        }
    }
    Ok(best)
}

/// Exhaustive optimum of the penalized problem over all feasible supports.
pub fn brute_force_penalized(
    rs: &RuleSpace,
    v: &[f64],
    lambda: f64,
    gamma: f64,
    scheme: AttributeScheme,
) -> Result<(f64, Vec<usize>)> {
    let mut best = (f64::INFINITY, Vec::new());
    for s in enumerate_feasible_supports(rs, scheme, u64::MAX)? {
        let a: u64 = s.iter().map(|&i| attribute(rs, scheme, i)).sum();
        let obj = support_objective(rs, gamma, &s, v)? + lambda * a as f64;
        if obj < best.0 {
            best = (obj, s);
        }
    }
    Ok(best)
}

/// `½ vᵀ(I + γ M diag(z) Mᵀ)⁻¹ v` by a dense n×n solve.
pub fn relaxed_q_dense(rs: &RuleSpace, gamma: f64, z: &[f64], v: &[f64]) -> Result<f64> {
    let u = dense_inverse_apply(rs, gamma, z, v)?;
    Ok(0.5 * v.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>())
}

fn dense_inverse_apply(rs: &RuleSpace, gamma: f64, z: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let n = rs.n_rows();
    guard(n <= MAX_DENSE_ROWS, "too many rows for a dense solve")?;
    let mut a = vec![vec![0.0; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for (i, &zi) in z.iter().enumerate() {
        if zi == 0.0 {
            continue;
        }
        let c = rs.column(i);
        let s = gamma * zi * c.mu * c.mu;
        for &p in &c.rows {
            for &q in &c.rows {
                a[p as usize][q as usize] += s;
            }
        }
    }
    gauss_solve(a, v.to_vec())
}

/// Central differences of the relaxed objective at an interior point.
pub fn fd_gradient(rs: &RuleSpace, gamma: f64, z: &[f64], v: &[f64], h: f64) -> Result<Vec<f64>> {
    guard(rs.m() <= MAX_FD_NODES, "too many nodes for finite differences")?;
    let mut g = Vec::with_capacity(z.len());
    let mut zp = z.to_vec();
    for i in 0..z.len() {
        zp[i] = z[i] + h;
        let fp = relaxed_q_dense(rs, gamma, &zp, v)?;
        zp[i] = z[i] - h;
        let fm = relaxed_q_dense(rs, gamma, &zp, v)?;
        zp[i] = z[i];
        g.push((fp - fm) / (2.0 * h));
    }
    Ok(g)
}

/// Relaxed penalized optimum by projected gradient over convex weights on the
/// enumerated antichain vertices. Returns the best objective seen.
pub fn relaxation_oracle(
    rs: &RuleSpace,
    v: &[f64],
    lambda: f64,
    gamma: f64,
    scheme: AttributeScheme,
    iterations: usize,
) -> Result<f64> {
    guard(rs.m() <= 12, "too many nodes for the relaxation oracle")?;
    let vertices = enumerate_feasible_supports(rs, scheme, u64::MAX)?;
    guard(vertices.len() <= 256, "too many vertices for the relaxation oracle")?;
    let m = rs.m();
    let attrs: Vec<f64> = (0..m).map(|i| attribute(rs, scheme, i) as f64).collect();
    let to_z = |theta: &[f64]| {
        let mut z = vec![0.0; m];
        for (s, &t) in vertices.iter().zip(theta) {
            for &i in s {
                z[i] += t;
            }
        }
        z.iter_mut().for_each(|x| *x = x.clamp(0.0, 1.0));
        z
    };
    let value = |z: &[f64]| -> Result<f64> {
        Ok(relaxed_q_dense(rs, gamma, z, v)? + lambda * z.iter().zip(&attrs).map(|(a, b)| a * b).sum::<f64>())
    };
    let grad_z = |z: &[f64]| -> Result<Vec<f64>> {
        let u = dense_inverse_apply(rs, gamma, z, v)?;
        Ok((0..m)
            .map(|i| {
                let d: f64 = dense_column(rs, i).iter().zip(&u).map(|(a, b)| a * b).sum();
                -0.5 * gamma * d * d + lambda * attrs[i]
            })
            .collect())
    };
    let nv = vertices.len();
    let mut theta = vec![1.0 / nv as f64; nv];
    let mut f = value(&to_z(&theta))?;
    let mut step = 1.0;
    for _ in 0..iterations {
        let g = grad_z(&to_z(&theta))?;
        let gt: Vec<f64> = vertices
            .iter()
            .map(|s| s.iter().map(|&i| g[i]).sum())
            .collect();
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = theta.iter().zip(&gt).map(|(t, g)| t - step * g).collect();
            let cand = project_simplex(&cand);
            let fc = value(&to_z(&cand))?;
            let decrease: f64 = theta
                .iter()
                .zip(&cand)
                .zip(&gt)
                .map(|((t, c), g)| g * (c - t) + (c - t) * (c - t) / (2.0 * step))
                .sum();
            if fc <= f + decrease + 1e-15 {
                theta = cand;
                f = fc;
                accepted = true;
                step *= 1.5;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok(f)
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(x: &[f64]) -> Vec<f64> {
    let mut u = x.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cum += uk;
        let t = (cum - 1.0) / (k + 1) as f64;
        if uk - t > 0.0 {
            tau = t;
        }
    }
    x.iter().map(|&xi| (xi - tau).max(0.0)).collect()
}

/// Exhaustive maximum of `Σ ζ_i` over antichains of a forest.
pub fn max_antichain_brute(parent: &[Option<usize>], weights: &[f64]) -> Result<f64> {
    Ok(forest_antichains(parent)?
        .iter()
        .map(|s| s.iter().map(|&i| weights[i]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max))
}
