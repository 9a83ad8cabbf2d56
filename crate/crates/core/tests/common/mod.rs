#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treeprune::dataio::Dataset;
use treeprune::ensemble::{fit_gbt, GbtParams, TreeEnsemble};
use treeprune::rulespace::RuleSpace;

pub struct Instance {
    pub ds: Dataset,
    pub ensemble: TreeEnsemble,
    pub rs: RuleSpace,
}

impl Instance {
    pub fn y(&self) -> &[f64] {
        self.ds.response()
    }

    pub fn target(&self) -> Vec<f64> {
        self.rs.target(self.ds.response())
    }
}

/// Small random boosted ensemble with at most `max_m` candidate nodes.
pub fn random_instance(seed: u64, max_trees: usize, max_depth: usize, max_n: usize, max_m: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = rng.gen_range(12..=max_n);
        let p = rng.gen_range(1..=3);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| (rng.gen::<f64>() * 20.0).round() / 20.0).collect())
            .collect();
        let y: Vec<f64> = rows
            .iter()
            .map(|x| 2.0 * x[0] - x[p - 1] * x[0] + 0.5 * rng.gen::<f64>())
            .collect();
        let Ok(ds) = Dataset::from_rows(&rows, y) else { continue };
        let params = GbtParams {
            num_trees: rng.gen_range(1..=max_trees),
            max_depth: rng.gen_range(1..=max_depth),
            learning_rate: rng.gen_range(0.2..1.0),
            min_leaf: rng.gen_range(1..=3),
            seed,
        };
        let ensemble = fit_gbt(&ds, &params).unwrap();
        let rs = RuleSpace::build(&ensemble, rng.gen_bool(0.8)).unwrap();
        if rs.m() <= max_m && rs.m() >= 2 {
            return Instance { ds, ensemble, rs };
        }
    }
}
