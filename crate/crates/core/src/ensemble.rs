//! Gradient-boosted regression trees.
//!
//! Trees are fit to residuals of the centered response with exact greedy
//! variance-reduction splits. Each node stores its additive contribution
//! `mu = learning_rate * mean(residual at node)`, so that the leaves of a tree
//! reproduce that tree's share of the ensemble prediction.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::dataio::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub left: Option<usize>,
    pub right: Option<usize>,
    pub feature: Option<usize>,
    pub threshold: Option<f64>,
    pub n_samples: usize,
    pub mu: f64,
    pub depth: usize,
    /// Sorted training rows reaching this node. Not serialized.
    #[serde(skip)]
    pub member_rows: Vec<u32>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.left.is_none()
    }

    pub fn children(&self) -> Option<(usize, usize)> {
        self.left.zip(self.right)
    }
}

/// A binary tree stored in breadth-first order; node `0` is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn leaf_of(&self, x: &[f64]) -> usize {
        let mut id = 0;
        loop {
            let node = &self.nodes[id];
            match (node.children(), node.feature, node.threshold) {
                (Some((l, r)), Some(j), Some(s)) => id = if x[j] <= s { l } else { r },
                _ => return id,
            }
        }
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.nodes.is_empty() {
            return bad("tree without nodes".into());
        }
        for (pos, node) in self.nodes.iter().enumerate() {
            if node.id != pos {
                return bad(format!("node id {} stored at position {pos}", node.id));
            }
            match (pos, node.parent) {
                (0, None) => {}
                (0, Some(_)) => return bad("root has a parent".into()),
                (_, None) => return bad(format!("node {pos} has no parent")),
                (_, Some(p)) if p >= pos => return bad(format!("node {pos} precedes its parent")),
                (_, Some(p)) => {
                    let parent = &self.nodes[p];
                    if parent.left != Some(pos) && parent.right != Some(pos) {
                        return bad(format!("node {pos} is not a child of {p}"));
                    }
                    if node.depth != parent.depth + 1 {
                        return bad(format!("node {pos} has inconsistent depth"));
                    }
                }
            }
            match (node.left, node.right) {
                (None, None) => {}
                (Some(l), Some(r)) => {
                    if l >= self.nodes.len() || r >= self.nodes.len() {
                        return bad(format!("node {pos} has dangling children"));
                    }
                    if node.feature.is_none() || node.threshold.is_none() {
                        return bad(format!("internal node {pos} has no split"));
                    }
                }
                _ => return bad(format!("node {pos} has exactly one child")),
            }
        }
        if self.nodes[0].depth != 0 {
            return bad("root depth must be 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEnsemble {
    pub learning_rate: f64,
    pub base_score: f64,
    #[serde(default)]
    pub max_depth: usize,
    #[serde(default)]
    pub feature_names: Vec<String>,
    pub trees: Vec<Tree>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbtParams {
    pub num_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_leaf: usize,
    /// Reserved for stochastic variants; exact greedy training does not draw
    /// random numbers.
    pub seed: u64,
}

impl Default for GbtParams {
    fn default() -> Self {
        Self {
            num_trees: 100,
            max_depth: 3,
            learning_rate: 0.1,
            min_leaf: 5,
            seed: 0,
        }
    }
}

impl TreeEnsemble {
    pub fn num_nodes(&self) -> usize {
        self.trees.iter().map(Tree::len).sum()
    }

    pub fn num_features(&self) -> Option<usize> {
        if !self.feature_names.is_empty() {
            return Some(self.feature_names.len());
        }
        self.trees
            .iter()
            .flat_map(|t| t.nodes.iter().filter_map(|n| n.feature))
            .max()
            .map(|j| j + 1)
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.base_score
            + self
                .trees
                .iter()
                .map(|t| t.nodes[t.leaf_of(x)].mu)
                .sum::<f64>()
    }

    pub fn predict(&self, ds: &Dataset) -> Result<Vec<f64>> {
        self.check_columns(ds)?;
        Ok(ds.rows().map(|x| self.predict_row(x)).collect())
    }

    fn check_columns(&self, ds: &Dataset) -> Result<()> {
        let p = ds.n_features();
        let ok = if self.feature_names.is_empty() {
            self.num_features().map_or(true, |need| need <= p)
        } else {
            self.feature_names.len() == p
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: self.num_features().unwrap_or(0),
                found: p,
            })
        }
    }

    /// Routes `ds` through every tree and records node membership.
    pub fn assign_rows(&mut self, ds: &Dataset) -> Result<()> {
        self.check_columns(ds)?;
        let mut changed = false;
        for tree in &mut self.trees {
            for node in &mut tree.nodes {
                node.member_rows.clear();
            }
            for (k, x) in ds.rows().enumerate() {
                let mut id = 0;
                loop {
                    let node = &mut tree.nodes[id];
                    node.member_rows.push(k as u32);
                    match (node.children(), node.feature, node.threshold) {
                        (Some((l, r)), Some(j), Some(s)) => {
                            id = if x[j] <= s { l } else { r }
                        }
                        _ => break,
                    }
                }
            }
            for node in &mut tree.nodes {
                if node.n_samples != node.member_rows.len() {
                    changed = true;
                    node.n_samples = node.member_rows.len();
                }
            }
        }
        if changed {
            log::warn!("node sample counts differ from the stored ensemble; data is not the training set");
        }
        Ok(())
    }

    pub(crate) fn finish_load(&mut self) -> Result<()> {
        for tree in &self.trees {
            tree.validate()?;
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "learning_rate {} outside (0, 1]",
                self.learning_rate
            )));
        }
        let depth = self.trees.iter().map(Tree::depth).max().unwrap_or(0);
        self.max_depth = self.max_depth.max(depth);
        Ok(())
    }
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
}

fn best_split(
    ds: &Dataset,
    rows: &[u32],
    residual: &[f64],
    min_leaf: usize,
    scratch: &mut Vec<(f64, f64)>,
) -> Option<SplitChoice> {
    let n = rows.len();
    if n < 2 * min_leaf {
        return None;
    }
    let total: f64 = rows.iter().map(|&k| residual[k as usize]).sum();
    let sse: f64 = {
        let mean = total / n as f64;
        rows.iter()
            .map(|&k| (residual[k as usize] - mean).powi(2))
            .sum()
    };
    if sse <= 0.0 {
        return None;
    }
    let base = total * total / n as f64;
    let mut best_gain = 1e-12 * sse;
    let mut best: Option<SplitChoice> = None;
    for j in 0..ds.n_features() {
        scratch.clear();
        scratch.extend(
            rows.iter()
                .map(|&k| (ds.value(k as usize, j), residual[k as usize])),
        );
        // rows are sorted, so a stable sort keeps ties in row order
        scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left_sum = 0.0;
        for i in 0..n - 1 {
            left_sum += scratch[i].1;
            let (lo, hi) = (scratch[i].0, scratch[i + 1].0);
            let n_left = i + 1;
            let n_right = n - n_left;
            if lo == hi || n_left < min_leaf || n_right < min_leaf {
                continue;
            }
            let right_sum = total - left_sum;
            let gain =
                left_sum * left_sum / n_left as f64 + right_sum * right_sum / n_right as f64 - base;
            if gain > best_gain {
                let mut threshold = lo + (hi - lo) / 2.0;
                if !(threshold < hi) {
                    threshold = lo;
                }
                best_gain = gain;
                best = Some(SplitChoice {
                    feature: j,
                    threshold,
                });
            }
        }
    }
    best
}

fn grow_tree(
    ds: &Dataset,
    residual: &[f64],
    max_depth: usize,
    learning_rate: f64,
    min_leaf: usize,
) -> Tree {
    let n = ds.n_rows();
    let mean_of = |rows: &[u32]| -> f64 {
        rows.iter().map(|&k| residual[k as usize]).sum::<f64>() / rows.len() as f64
    };
    let all: Vec<u32> = (0..n as u32).collect();
    let mut nodes = vec![TreeNode {
        id: 0,
        parent: None,
        left: None,
        right: None,
        feature: None,
        threshold: None,
        n_samples: n,
        mu: learning_rate * mean_of(&all),
        depth: 0,
        member_rows: all,
    }];
    let mut queue = VecDeque::from([0usize]);
    let mut scratch = Vec::with_capacity(n);
    while let Some(id) = queue.pop_front() {
        if nodes[id].depth >= max_depth {
            continue;
        }
        let Some(choice) = best_split(ds, &nodes[id].member_rows, residual, min_leaf, &mut scratch)
        else {
            continue;
        };
        let (left_rows, right_rows): (Vec<u32>, Vec<u32>) = nodes[id]
            .member_rows
            .iter()
            .partition(|&&k| ds.value(k as usize, choice.feature) <= choice.threshold);
        let depth = nodes[id].depth + 1;
        for (offset, rows) in [left_rows, right_rows].into_iter().enumerate() {
            let child = nodes.len();
            nodes.push(TreeNode {
                id: child,
                parent: Some(id),
                left: None,
                right: None,
                feature: None,
                threshold: None,
                n_samples: rows.len(),
                mu: learning_rate * mean_of(&rows),
                depth,
                member_rows: rows,
            });
            if offset == 0 {
                nodes[id].left = Some(child);
            } else {
                nodes[id].right = Some(child);
            }
            queue.push_back(child);
        }
        nodes[id].feature = Some(choice.feature);
        nodes[id].threshold = Some(choice.threshold);
    }
    Tree { nodes }
}

/// Fits a boosted ensemble of regression trees to `ds`.
pub fn fit_gbt(ds: &Dataset, params: &GbtParams) -> Result<TreeEnsemble> {
    if params.num_trees == 0 {
        return Err(Error::InvalidArgument("num_trees must be at least 1".into()));
    }
    if params.max_depth == 0 {
        return Err(Error::InvalidArgument("max_depth must be at least 1".into()));
    }
    if params.min_leaf == 0 {
        return Err(Error::InvalidArgument("min_leaf must be at least 1".into()));
    }
    if !(params.learning_rate > 0.0 && params.learning_rate <= 1.0) {
        return Err(Error::InvalidArgument("learning_rate must be in (0, 1]".into()));
    }
    let y = ds.response();
    let n = y.len() as f64;
    let base_score = y.iter().sum::<f64>() / n;
    if y.iter().all(|&v| v == y[0]) {
        log::warn!("response is constant; trees will be single nodes");
    }
    let mut residual: Vec<f64> = y.iter().map(|v| v - base_score).collect();
    let mut trees = Vec::with_capacity(params.num_trees);
    for t in 0..params.num_trees {
        let tree = grow_tree(
            ds,
            &residual,
            params.max_depth,
            params.learning_rate,
            params.min_leaf,
        );
        for node in tree.nodes.iter().filter(|nd| nd.is_leaf()) {
            for &k in &node.member_rows {
                residual[k as usize] -= node.mu;
            }
        }
        log::debug!("tree {t}: {} nodes", tree.len());
        trees.push(tree);
    }
    Ok(TreeEnsemble {
        learning_rate: params.learning_rate,
        base_score,
        max_depth: params.max_depth,
        feature_names: ds.feature_names().to_vec(),
        trees,
    })
}

/// Coefficient of determination, `1 - SSE/SST`.
pub fn r2(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Dimension {
            expected: y_true.len(),
            found: y_pred.len(),
        });
    }
    if y_true.len() < 2 {
        return Err(Error::InvalidArgument("r2 needs at least two points".into()));
    }
    let mean = y_true.iter().sum::<f64>() / y_true.len() as f64;
    let sst: f64 = y_true.iter().map(|v| (v - mean).powi(2)).sum();
    if sst <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let sse: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    Ok(1.0 - sse / sst)
}

pub fn mse(y_true: &[f64], y_pred: &[f64]) -> f64 {
    y_true
        .iter()
        .zip(y_pred)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / y_true.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stump_data() -> Dataset {
        let rows = vec![vec![0.0, 5.0], vec![0.25, 1.0], vec![0.75, 2.0], vec![1.0, 0.0]];
        Dataset::from_rows(&rows, vec![1.0, 1.0, 3.0, 3.0]).unwrap()
    }

    #[test]
    fn perfect_stump() {
        let ds = stump_data();
        let params = GbtParams {
            num_trees: 1,
            max_depth: 1,
            learning_rate: 1.0,
            min_leaf: 1,
            seed: 0,
        };
        let e = fit_gbt(&ds, &params).unwrap();
        let tree = &e.trees[0];
        assert_eq!(tree.len(), 3);
        assert_eq!(tree.nodes[0].feature, Some(0));
        assert_eq!(tree.nodes[0].threshold, Some(0.5));
        assert_eq!(e.base_score, 2.0);
        assert_eq!(tree.nodes[1].mu, -1.0);
        assert_eq!(tree.nodes[2].mu, 1.0);
        let pred = e.predict(&ds).unwrap();
        assert_eq!(pred, ds.response());
        assert_eq!(mse(ds.response(), &pred), 0.0);
    }

    #[test]
    fn no_valid_split_gives_root_only() {
        let ds = stump_data();
        let params = GbtParams {
            num_trees: 1,
            max_depth: 3,
            learning_rate: 0.5,
            min_leaf: 4,
            seed: 0,
        };
        let e = fit_gbt(&ds, &params).unwrap();
        assert_eq!(e.trees[0].len(), 1);
        assert_eq!(e.trees[0].nodes[0].mu, 0.0);
        assert!(e.predict(&ds).unwrap().iter().all(|&v| v == 2.0));
    }

    #[test]
    fn constant_response_is_allowed() {
        let rows: Vec<Vec<f64>> = (0..6).map(|k| vec![k as f64]).collect();
        let ds = Dataset::from_rows(&rows, vec![4.0; 6]).unwrap();
        let e = fit_gbt(&ds, &GbtParams { min_leaf: 1, ..Default::default() }).unwrap();
        assert!(e.trees.iter().all(|t| t.len() == 1));
    }

    #[test]
    fn empty_ensemble_predicts_base() {
        let ds = stump_data();
        let e = TreeEnsemble {
            learning_rate: 0.1,
            base_score: 7.5,
            max_depth: 1,
            feature_names: vec![],
            trees: vec![],
        };
        assert_eq!(e.predict(&ds).unwrap(), vec![7.5; 4]);
    }

    #[test]
    fn split_ties_prefer_lowest_feature() {
        // both columns separate the classes identically
        let rows = vec![vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0, 1.0], vec![1.0, 1.0]];
        let ds = Dataset::from_rows(&rows, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let params = GbtParams {
            num_trees: 1,
            max_depth: 1,
            learning_rate: 1.0,
            min_leaf: 1,
            seed: 0,
        };
        let e = fit_gbt(&ds, &params).unwrap();
        assert_eq!(e.trees[0].nodes[0].feature, Some(0));
    }

    #[test]
    fn column_mismatch_is_rejected() {
        let ds = stump_data();
        let e = fit_gbt(&ds, &GbtParams { min_leaf: 1, ..Default::default() }).unwrap();
        let narrow = Dataset::from_rows(&[vec![0.0]], vec![0.0]).unwrap();
        assert!(matches!(e.predict(&narrow), Err(Error::Dimension { .. })));
    }

    #[test]
    fn r2_values() {
        let y = [0.0, 1.0, 2.0];
        assert_eq!(r2(&y, &y).unwrap(), 1.0);
        assert_eq!(r2(&y, &[1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(r2(&y, &[0.0, 1.0, 1.0]).unwrap(), 0.5);
        assert!(matches!(r2(&[1.0, 1.0], &[1.0, 1.0]), Err(Error::ZeroVariance)));
        assert!(r2(&[1.0], &[1.0]).is_err());
    }
}
