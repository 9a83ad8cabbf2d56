//! Maximum-weight antichain on a forest by dynamic programming.

/// Children lists for a parent array where every parent precedes its children.
pub fn children_of(parent: &[Option<usize>]) -> Vec<Vec<usize>> {
    let mut children = vec![Vec::new(); parent.len()];
    for (i, p) in parent.iter().enumerate() {
        if let Some(p) = *p {
            children[p].push(i);
        }
    }
    children
}

/// Maximizes `Σ ζ_i z_i` over antichains of the forest given by `parent`
/// (`parent[i] < i`). Returns the optimal value and the selection.
///
/// `best(i) = max(ζ_i, Σ_c best(c))`; a node is taken only when its weight is
/// strictly larger than what its subtree offers, so ties resolve toward the
/// deeper (or empty) choice.
pub fn max_weight_antichain(parent: &[Option<usize>], weights: &[f64]) -> (f64, Vec<bool>) {
    assert_eq!(parent.len(), weights.len());
    let n = parent.len();
    let children = children_of(parent);
    let mut best = vec![0.0; n];
    let mut take = vec![false; n];
    for i in (0..n).rev() {
        debug_assert!(parent[i].map_or(true, |p| p < i));
        let below: f64 = children[i].iter().map(|&c| best[c]).sum();
        if weights[i] > below {
            best[i] = weights[i];
            take[i] = true;
        } else {
            best[i] = below;
        }
    }
    let mut selected = vec![false; n];
    let mut value = 0.0;
    let mut stack: Vec<usize> = (0..n).filter(|&i| parent[i].is_none()).rev().collect();
    while let Some(i) = stack.pop() {
        if take[i] {
            selected[i] = true;
            value += weights[i];
        } else {
            stack.extend(children[i].iter().rev());
        }
    }
    (value, selected)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_takes_leaf() {
        let parent = vec![None, Some(0), Some(1)];
        let (v, sel) = max_weight_antichain(&parent, &[1.0, 2.0, 3.0]);
        assert_eq!(v, 3.0);
        assert_eq!(sel, vec![false, false, true]);
    }

    #[test]
    fn heavy_root_wins() {
        let parent = vec![None, Some(0), Some(0)];
        let (v, sel) = max_weight_antichain(&parent, &[5.0, 1.0, 1.0]);
        assert_eq!(v, 5.0);
        assert_eq!(sel, vec![true, false, false]);
    }

    #[test]
    fn leaves_beat_root_when_heavier() {
        let parent = vec![None, Some(0), Some(0)];
        let (v, sel) = max_weight_antichain(&parent, &[0.9, 0.5, 0.5]);
        assert_eq!(v, 1.0);
        assert_eq!(sel, vec![false, true, true]);
    }

    #[test]
    fn negative_weights_select_nothing() {
        let parent = vec![None, Some(0), Some(0), None];
        let (v, sel) = max_weight_antichain(&parent, &[-1.0, -2.0, 0.0, -0.5]);
        assert_eq!(v, 0.0);
        assert!(sel.iter().all(|s| !s));
    }

    #[test]
    fn forest_combines_roots() {
        let parent = vec![None, Some(0), Some(0), None, Some(3), Some(3)];
        let (v, sel) = max_weight_antichain(&parent, &[1.0, 0.7, 0.7, 3.0, 1.0, 1.0]);
        assert!((v - 4.4).abs() < 1e-12);
        assert_eq!(sel, vec![false, true, true, true, false, false]);
    }
}
