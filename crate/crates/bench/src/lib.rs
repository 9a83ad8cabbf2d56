//! Fixtures shared by the benchmarks.

use treeprune::synth::friedman_like;
use treeprune::{fit_gbt, GbtParams, RuleSpace};

/// Rule space of a boosted ensemble on Friedman-style data, plus its response.
pub fn fixture(n: usize, trees: usize, depth: usize) -> (RuleSpace, Vec<f64>) {
    let ds = friedman_like(n, 10, 1.0, 7).expect("synthetic data");
    let params = GbtParams {
        num_trees: trees,
        max_depth: depth,
        ..Default::default()
    };
    let e = fit_gbt(&ds, &params).expect("training");
    let rs = RuleSpace::build(&e, true).expect("rule space");
    (rs, ds.response().to_vec())
}
