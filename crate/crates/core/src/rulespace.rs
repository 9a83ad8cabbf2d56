//! The node universe that pruning selects from.
//!
//! Every tree node becomes a sparse prediction column whose entries are the
//! node's contribution `mu` on the training rows it contains. Columns are
//! indexed globally in (tree order, breadth-first node order).
//!
//! A feasible selection picks, within each tree, an antichain of the tree
//! order: no selected node may be an ancestor of another selected node.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::dataio::{Condition, ModelMetadata, Op, Rule, RuleModel};
use crate::ensemble::TreeEnsemble;
use crate::error::{Error, Result};

/// Per-node cost used by the attribute budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum AttributeScheme {
    /// Every rule costs 1.
    #[default]
    RuleWeight,
    /// A rule costs its number of conditions.
    DepthWeight,
    /// A rule costs the number of distinct features it tests.
    FeatureWeight,
}

impl AttributeScheme {
    pub const ALL: [AttributeScheme; 3] = [
        AttributeScheme::RuleWeight,
        AttributeScheme::DepthWeight,
        AttributeScheme::FeatureWeight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttributeScheme::RuleWeight => "rule",
            AttributeScheme::DepthWeight => "depth",
            AttributeScheme::FeatureWeight => "feature",
        }
    }
}

impl std::str::FromStr for AttributeScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rule" => Ok(AttributeScheme::RuleWeight),
            "depth" => Ok(AttributeScheme::DepthWeight),
            "feature" => Ok(AttributeScheme::FeatureWeight),
            other => Err(Error::InvalidArgument(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RuleColumn {
    pub index: usize,
    pub tree: usize,
    pub node: usize,
    /// Sorted training rows reaching the node.
    pub rows: Vec<u32>,
    pub mu: f64,
    pub depth: usize,
    pub distinct_features: usize,
    /// Global indices of all nodes below this one.
    pub descendants: Vec<usize>,
    /// Global indices of the candidate nodes above this one.
    pub ancestors: Vec<usize>,
    pub parent: Option<usize>,
    pub children: Option<(usize, usize)>,
    /// Root-to-node split conditions.
    pub conditions: Vec<Condition>,
}

impl RuleColumn {
    pub fn norm_sq(&self) -> f64 {
        self.rows.len() as f64 * self.mu * self.mu
    }

    pub fn attribute(&self, scheme: AttributeScheme) -> u32 {
        match scheme {
            AttributeScheme::RuleWeight => 1,
            AttributeScheme::DepthWeight => self.depth as u32,
            AttributeScheme::FeatureWeight => self.distinct_features as u32,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RuleSpace {
    columns: Vec<RuleColumn>,
    tree_ranges: Vec<Range<usize>>,
    n_rows: usize,
    base_score: f64,
    feature_names: Vec<String>,
}

/// A feasible support with ridge weights. `objective` is the squared-loss-plus-ridge
/// value of the weighted rules against the fitting target.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Selection {
    pub support: Vec<usize>,
    pub weights: Vec<f64>,
    pub objective: f64,
    pub attribute_sum: u64,
}

impl Selection {
    pub fn empty(objective: f64) -> Self {
        Self {
            objective,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }
}

/// Per-tree conflict description.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeConflicts {
    /// `(i, j)` with `j` a descendant of `i`.
    pub pairs: Vec<(usize, usize)>,
    /// One root-to-leaf chain per leaf; at most one member may be selected.
    pub path_cliques: Vec<Vec<usize>>,
}

impl RuleSpace {
    /// Flattens an ensemble whose nodes carry training-row membership.
    pub fn build(e: &TreeEnsemble, include_root: bool) -> Result<Self> {
        if e.trees.is_empty() {
            return Err(Error::Empty("ensemble has no trees".into()));
        }
        let n_rows = e.trees[0].nodes[0].member_rows.len();
        if n_rows == 0 {
            return Err(Error::InvalidArgument(
                "ensemble nodes carry no training rows; call assign_rows first".into(),
            ));
        }
        let mut columns: Vec<RuleColumn> = Vec::with_capacity(e.num_nodes());
        let mut tree_ranges = Vec::with_capacity(e.trees.len());
        for (t, tree) in e.trees.iter().enumerate() {
            let start = columns.len();
            let skip = usize::from(!include_root);
            let global = |id: usize| -> Option<usize> {
                (id >= skip).then(|| start + id - skip)
            };
            for node in tree.nodes.iter().skip(skip) {
                if node.member_rows.len() != node.n_samples {
                    return Err(Error::InvalidArgument(format!(
                        "tree {t} node {} membership does not match n_samples",
                        node.id
                    )));
                }
                let mut conditions = Vec::with_capacity(node.depth);
                let mut ancestors = Vec::with_capacity(node.depth);
                let mut cur = node.id;
                while let Some(p) = tree.nodes[cur].parent {
                    let parent = &tree.nodes[p];
                    let (j, s) = (parent.feature.unwrap(), parent.threshold.unwrap());
                    let op = if parent.left == Some(cur) { Op::Le } else { Op::Gt };
                    conditions.push(Condition {
                        feature: j,
                        op,
                        threshold: s,
                    });
                    if let Some(g) = global(p) {
                        ancestors.push(g);
                    }
                    cur = p;
                }
                conditions.reverse();
                ancestors.reverse();
                let distinct: HashSet<usize> = conditions.iter().map(|c| c.feature).collect();
                columns.push(RuleColumn {
                    index: columns.len(),
                    tree: t,
                    node: node.id,
                    rows: node.member_rows.clone(),
                    mu: node.mu,
                    depth: node.depth,
                    distinct_features: distinct.len(),
                    descendants: Vec::new(),
                    ancestors,
                    parent: node.parent.and_then(global),
                    children: node
                        .children()
                        .map(|(l, r)| (global(l).unwrap(), global(r).unwrap())),
                    conditions,
                });
            }
            let end = columns.len();
            for i in start..end {
                for a in columns[i].ancestors.clone() {
                    columns[a].descendants.push(i);
                }
            }
            tree_ranges.push(start..end);
        }
        Ok(Self {
            columns,
            tree_ranges,
            n_rows,
            base_score: e.base_score,
            feature_names: e.feature_names.clone(),
        })
    }

    /// Builds a rule space directly from columns; used by tests and tools that
    /// construct synthetic instances.
    pub fn from_parts(
        columns: Vec<RuleColumn>,
        tree_ranges: Vec<Range<usize>>,
        n_rows: usize,
        base_score: f64,
    ) -> Self {
        Self {
            columns,
            tree_ranges,
            n_rows,
            base_score,
            feature_names: Vec::new(),
        }
    }

    pub fn m(&self) -> usize {
        self.columns.len()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn num_trees(&self) -> usize {
        self.tree_ranges.len()
    }

    pub fn base_score(&self) -> f64 {
        self.base_score
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn columns(&self) -> &[RuleColumn] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> &RuleColumn {
        &self.columns[i]
    }

    pub fn tree_range(&self, t: usize) -> Range<usize> {
        self.tree_ranges[t].clone()
    }

    pub fn attribute(&self, scheme: AttributeScheme, i: usize) -> u32 {
        self.columns[i].attribute(scheme)
    }

    pub fn attributes(&self, scheme: AttributeScheme) -> Vec<u32> {
        self.columns.iter().map(|c| c.attribute(scheme)).collect()
    }

    pub fn attribute_sum(&self, scheme: AttributeScheme, support: &[usize]) -> u64 {
        support
            .iter()
            .map(|&i| u64::from(self.attribute(scheme, i)))
            .sum()
    }

    /// Fitting target: the response centered by the ensemble's base score.
    pub fn target(&self, y: &[f64]) -> Vec<f64> {
        y.iter().map(|v| v - self.base_score).collect()
    }

    /// `M_iᵀ v`
    pub fn dot(&self, i: usize, v: &[f64]) -> f64 {
        let c = &self.columns[i];
        c.mu * c.rows.iter().map(|&k| v[k as usize]).sum::<f64>()
    }

    /// `M_iᵀ M_j`
    pub fn cross(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (&self.columns[i], &self.columns[j]);
        if i == j {
            return a.norm_sq();
        }
        let shared = if a.tree == b.tree {
            if self.is_ancestor(i, j) {
                b.rows.len()
            } else if self.is_ancestor(j, i) {
                a.rows.len()
            } else {
                0
            }
        } else {
            sorted_intersection_len(&a.rows, &b.rows)
        };
        a.mu * b.mu * shared as f64
    }

    /// `out += scale * M_i`
    pub fn add_column(&self, i: usize, scale: f64, out: &mut [f64]) {
        let c = &self.columns[i];
        let v = scale * c.mu;
        for &k in &c.rows {
            out[k as usize] += v;
        }
    }

    /// Unscaled row sums `Σ_{k ∈ rows(i)} v_k` for every node of tree `t`,
    /// accumulated bottom-up so each training row is read once.
    pub fn tree_row_sums(&self, t: usize, v: &[f64]) -> Vec<f64> {
        let range = self.tree_range(t);
        let mut sums = vec![0.0; range.len()];
        for i in range.clone().rev() {
            let c = &self.columns[i];
            sums[i - range.start] = match c.children {
                Some((l, r)) => sums[l - range.start] + sums[r - range.start],
                None => c.rows.iter().map(|&k| v[k as usize]).sum(),
            };
        }
        sums
    }

    /// `M_iᵀ v` for every node of tree `t`.
    pub fn tree_dots(&self, t: usize, v: &[f64]) -> Vec<f64> {
        let range = self.tree_range(t);
        let mut sums = self.tree_row_sums(t, v);
        for (s, c) in sums.iter_mut().zip(&self.columns[range]) {
            *s *= c.mu;
        }
        sums
    }

    /// `Mᵀ v` over all columns.
    pub fn all_dots(&self, v: &[f64]) -> Vec<f64> {
        (0..self.num_trees())
            .flat_map(|t| self.tree_dots(t, v))
            .collect()
    }

    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        let (ca, cb) = (&self.columns[a], &self.columns[b]);
        ca.tree == cb.tree && cb.ancestors.binary_search(&a).is_ok()
    }

    pub fn conflicts(&self, a: usize, b: usize) -> bool {
        a != b && (self.is_ancestor(a, b) || self.is_ancestor(b, a))
    }

    /// True when no member of `support` is an ancestor of another and all
    /// indices are distinct and in range.
    pub fn is_antichain(&self, support: &[usize]) -> bool {
        let mut seen = HashSet::with_capacity(support.len());
        for &i in support {
            if i >= self.m() || !seen.insert(i) {
                return false;
            }
        }
        support
            .iter()
            .all(|&i| self.columns[i].ancestors.iter().all(|a| !seen.contains(a)))
    }

    /// Pairwise conflicts and the equivalent path-clique rows for tree `t`.
    pub fn conflict_rows(&self, t: usize) -> TreeConflicts {
        let range = self.tree_range(t);
        let mut pairs = Vec::new();
        let mut path_cliques = Vec::new();
        for i in range {
            let c = &self.columns[i];
            pairs.extend(c.descendants.iter().map(|&j| (i, j)));
            if c.children.is_none() {
                let mut clique = c.ancestors.clone();
                clique.push(i);
                path_cliques.push(clique);
            }
        }
        TreeConflicts {
            pairs,
            path_cliques,
        }
    }

    /// Converts a selection into a rule model predicting
    /// `base_score + Σ weight * mu * 1{rule applies}`.
    pub fn to_rule_model(&self, sel: &Selection, metadata: ModelMetadata) -> RuleModel {
        let rules = sel
            .support
            .iter()
            .zip(&sel.weights)
            .map(|(&i, &w)| {
                let c = &self.columns[i];
                Rule {
                    conditions: c.conditions.clone(),
                    node_mean: c.mu,
                    weight: w,
                    tree: c.tree,
                    node: c.node,
                }
            })
            .collect();
        RuleModel {
            rules,
            intercept: self.base_score,
            feature_names: self.feature_names.clone(),
            metadata,
        }
    }

    /// `Σ_i w_i M_i`
    pub fn predict_support(&self, support: &[usize], weights: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_rows];
        for (&i, &w) in support.iter().zip(weights) {
            self.add_column(i, w, &mut out);
        }
        out
    }

    /// Mean number of conditions per selected rule (0 when empty).
    pub fn mean_depth(&self, support: &[usize]) -> f64 {
        if support.is_empty() {
            return 0.0;
        }
        support.iter().map(|&i| self.columns[i].depth).sum::<usize>() as f64 / support.len() as f64
    }

    pub fn sum_depth(&self, support: &[usize]) -> usize {
        support.iter().map(|&i| self.columns[i].depth).sum()
    }

    /// Number of distinct features referenced by the selected rules.
    pub fn features_used(&self, support: &[usize]) -> usize {
        support
            .iter()
            .flat_map(|&i| self.columns[i].conditions.iter().map(|c| c.feature))
            .collect::<HashSet<_>>()
            .len()
    }
}

fn sorted_intersection_len(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

fn fmt_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        return format!("{}", v as i64);
    }
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// Tightest interval per feature, in order of first appearance.
fn merge_conditions(conditions: &[Condition]) -> Vec<(usize, Option<f64>, Option<f64>)> {
    let mut merged: Vec<(usize, Option<f64>, Option<f64>)> = Vec::new();
    for c in conditions {
        let pos = match merged.iter().position(|m| m.0 == c.feature) {
            Some(p) => p,
            None => {
                merged.push((c.feature, None, None));
                merged.len() - 1
            }
        };
        let entry = &mut merged[pos];
        match c.op {
            Op::Gt => entry.1 = Some(entry.1.map_or(c.threshold, |lo| lo.max(c.threshold))),
            Op::Le => entry.2 = Some(entry.2.map_or(c.threshold, |hi| hi.min(c.threshold))),
        }
    }
    merged
}

/// One sentence per rule, largest absolute contribution first.
pub fn render_rules(model: &RuleModel) -> String {
    let name = |j: usize| -> String {
        model
            .feature_names
            .get(j)
            .cloned()
            .unwrap_or_else(|| format!("x{j}"))
    };
    let mut out = String::new();
    if model.rules.is_empty() {
        let _ = writeln!(out, "Predict {}.", fmt_num(model.intercept));
        return out;
    }
    let _ = writeln!(out, "Start from {}.", fmt_num(model.intercept));
    let mut order: Vec<&Rule> = model.rules.iter().collect();
    order.sort_by(|a, b| b.contribution().abs().total_cmp(&a.contribution().abs()));
    for rule in order {
        let clauses: Vec<String> = merge_conditions(&rule.conditions)
            .into_iter()
            .map(|(j, lo, hi)| match (lo, hi) {
                (Some(lo), Some(hi)) => format!("{} < {} ≤ {}", fmt_num(lo), name(j), fmt_num(hi)),
                (Some(lo), None) => format!("{} > {}", name(j), fmt_num(lo)),
                (None, Some(hi)) => format!("{} ≤ {}", name(j), fmt_num(hi)),
                (None, None) => unreachable!(),
            })
            .collect();
        let add = fmt_num(rule.contribution());
        if clauses.is_empty() {
            let _ = writeln!(out, "Always add {add} to prediction.");
        } else {
            let _ = writeln!(out, "If {} then add {add} to prediction.", clauses.join(" and "));
        }
    }
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::dataio::Dataset;
    use crate::ensemble::{fit_gbt, GbtParams};

    /// Full depth-2 tree on 8 rows: root splits x0, both children split x1.
    pub(crate) fn depth2_space(include_root: bool) -> RuleSpace {
        let rows: Vec<Vec<f64>> = (0..8)
            .map(|k| vec![(k / 4) as f64, ((k / 2) % 2) as f64])
            .collect();
        let y: Vec<f64> = (0..8).map(|k| [0.0, 1.0, 4.0, 9.0][k / 2]).collect();
        let ds = Dataset::from_rows(&rows, y).unwrap();
        let e = fit_gbt(
            &ds,
            &GbtParams {
                num_trees: 1,
                max_depth: 2,
                learning_rate: 1.0,
                min_leaf: 1,
                seed: 0,
            },
        )
        .unwrap();
        RuleSpace::build(&e, include_root).unwrap()
    }

    #[test]
    fn depth2_tree_has_four_leaves() {
        let rs = depth2_space(true);
        assert_eq!(rs.m(), 7);
        let leaves = rs.columns().iter().filter(|c| c.children.is_none()).count();
        assert_eq!(leaves, 4);
        assert_eq!(rs.column(0).depth, 0);
        assert_eq!(rs.column(0).distinct_features, 0);
        assert_eq!(rs.column(0).descendants.len(), 6);
        // breadth-first numbering: nodes 3..6 are the leaves
        assert_eq!(rs.column(3).ancestors, vec![0, 1]);
        let no_root = depth2_space(false);
        assert_eq!(no_root.m(), 6);
        assert_eq!(no_root.column(2).ancestors, vec![0]);
    }

    #[test]
    fn column_norms_and_identity() {
        let rs = depth2_space(true);
        for c in rs.columns() {
            let direct: f64 = c.rows.iter().map(|_| c.mu * c.mu).sum();
            assert!((c.norm_sq() - direct).abs() < 1e-12);
        }
        let v: Vec<f64> = (0..8).map(|k| k as f64 * 0.5 - 1.0).collect();
        let dots = rs.tree_dots(0, &v);
        for i in 0..rs.m() {
            assert!((dots[i] - rs.dot(i, &v)).abs() < 1e-12);
        }
    }

    #[test]
    fn figure_pattern_is_feasible() {
        let rs = depth2_space(true);
        // node 4 (first leaf, id 3) together with the right child (id 2)
        assert!(rs.is_antichain(&[2, 3]));
        assert!(!rs.is_antichain(&[0, 3]));
        assert!(!rs.is_antichain(&[1, 3]));
        assert!(rs.is_antichain(&[3, 4, 5, 6]));
        assert!(!rs.is_antichain(&[3, 3]));
    }

    #[test]
    fn depth1_conflicts() {
        let rows: Vec<Vec<f64>> = (0..4).map(|k| vec![k as f64]).collect();
        let ds = Dataset::from_rows(&rows, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let e = fit_gbt(
            &ds,
            &GbtParams {
                num_trees: 1,
                max_depth: 1,
                learning_rate: 1.0,
                min_leaf: 1,
                seed: 0,
            },
        )
        .unwrap();
        let rs = RuleSpace::build(&e, true).unwrap();
        let conf = rs.conflict_rows(0);
        assert_eq!(conf.path_cliques, vec![vec![0, 1], vec![0, 2]]);
        assert_eq!(conf.pairs, vec![(0, 1), (0, 2)]);
        // enumerate all subsets of {root, L, R}
        let feasible: Vec<Vec<usize>> = (1u32..8)
            .map(|mask| (0..3).filter(|b| mask >> b & 1 == 1).collect::<Vec<_>>())
            .filter(|s| rs.is_antichain(s))
            .collect();
        assert_eq!(feasible, vec![vec![0], vec![1], vec![2], vec![1, 2]]);
        // the clique form accepts exactly the same subsets
        for mask in 0u32..8 {
            let s: Vec<usize> = (0..3).filter(|b| mask >> b & 1 == 1).collect();
            let by_clique = conf
                .path_cliques
                .iter()
                .all(|q| q.iter().filter(|i| s.contains(i)).count() <= 1);
            assert_eq!(by_clique, rs.is_antichain(&s));
        }
    }

    #[test]
    fn attributes_by_scheme() {
        let rs = depth2_space(true);
        assert_eq!(rs.attribute(AttributeScheme::DepthWeight, 3), 2);
        assert_eq!(rs.attribute(AttributeScheme::FeatureWeight, 3), 2);
        for i in 0..rs.m() {
            assert_eq!(rs.attribute(AttributeScheme::RuleWeight, i), 1);
            assert!(
                rs.attribute(AttributeScheme::DepthWeight, i)
                    >= rs.attribute(AttributeScheme::FeatureWeight, i)
            );
        }
    }

    #[test]
    fn repeated_feature_counts_once() {
        // x0 alone drives y, so both levels split on x0
        let rows: Vec<Vec<f64>> = (0..8).map(|k| vec![k as f64, 0.0]).collect();
        let y = vec![0.0, 0.0, 1.0, 1.0, 5.0, 5.0, 9.0, 9.0];
        let ds = Dataset::from_rows(&rows, y).unwrap();
        let e = fit_gbt(
            &ds,
            &GbtParams {
                num_trees: 1,
                max_depth: 2,
                learning_rate: 1.0,
                min_leaf: 1,
                seed: 0,
            },
        )
        .unwrap();
        let rs = RuleSpace::build(&e, true).unwrap();
        let leaf = rs.columns().iter().find(|c| c.depth == 2).unwrap();
        assert_eq!(leaf.conditions.len(), 2);
        assert_eq!(rs.attribute(AttributeScheme::FeatureWeight, leaf.index), 1);
        assert_eq!(rs.attribute(AttributeScheme::DepthWeight, leaf.index), 2);
    }

    #[test]
    fn single_node_tree() {
        let rows: Vec<Vec<f64>> = (0..3).map(|k| vec![k as f64]).collect();
        let ds = Dataset::from_rows(&rows, vec![1.0, 2.0, 3.0]).unwrap();
        let e = fit_gbt(
            &ds,
            &GbtParams {
                num_trees: 1,
                max_depth: 1,
                learning_rate: 1.0,
                min_leaf: 2,
                seed: 0,
            },
        )
        .unwrap();
        let rs = RuleSpace::build(&e, true).unwrap();
        assert_eq!(rs.m(), 1);
        assert_eq!(rs.column(0).depth, 0);
        assert!(rs.column(0).descendants.is_empty());
    }

    fn meta() -> ModelMetadata {
        ModelMetadata {
            scheme: "rule".into(),
            budget: None,
            lambda: None,
            gamma: 1.0,
            solver: "test".into(),
            gap: 0.0,
        }
    }

    #[test]
    fn render_formats() {
        let empty = RuleModel {
            rules: vec![],
            intercept: 3.5,
            feature_names: vec![],
            metadata: meta(),
        };
        assert_eq!(render_rules(&empty), "Predict 3.5.\n");
        let cond = |op, t| Condition {
            feature: 0,
            op,
            threshold: t,
        };
        let model = RuleModel {
            rules: vec![
                Rule {
                    conditions: vec![cond(Op::Le, 0.5)],
                    node_mean: 2.0,
                    weight: 1.0,
                    tree: 0,
                    node: 1,
                },
                Rule {
                    conditions: vec![cond(Op::Le, 5.0), cond(Op::Le, 3.0)],
                    node_mean: 1.0,
                    weight: 0.5,
                    tree: 1,
                    node: 3,
                },
                Rule {
                    conditions: vec![cond(Op::Gt, 1.0), cond(Op::Le, 3.0)],
                    node_mean: -4.0,
                    weight: 1.0,
                    tree: 2,
                    node: 4,
                },
            ],
            intercept: 0.0,
            feature_names: vec!["x1".into()],
            metadata: meta(),
        };
        let text = render_rules(&model);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "Start from 0.");
        assert_eq!(lines[1], "If 1 < x1 ≤ 3 then add -4 to prediction.");
        assert_eq!(lines[2], "If x1 ≤ 0.5 then add 2 to prediction.");
        assert_eq!(lines[3], "If x1 ≤ 3 then add 0.5 to prediction.");
    }

    #[test]
    fn empty_ensemble_is_rejected() {
        let e = TreeEnsemble {
            learning_rate: 0.1,
            base_score: 0.0,
            max_depth: 1,
            feature_names: vec![],
            trees: vec![],
        };
        assert!(matches!(RuleSpace::build(&e, true), Err(Error::Empty(_))));
    }
}
