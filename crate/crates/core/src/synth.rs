//! Seeded synthetic regression data for tests, benches and demos.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataio::Dataset;
use crate::error::Result;

/// `n × p` uniform features with a smooth nonlinear response plus Gaussian
/// noise. Only the first few features carry signal.
pub fn friedman_like(n: usize, p: usize, noise: f64, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise.max(0.0)).expect("finite noise");
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let x: Vec<f64> = (0..p).map(|_| rng.gen::<f64>()).collect();
        let f = |j: usize| x.get(j).copied().unwrap_or(0.5);
        let signal = 10.0 * (std::f64::consts::PI * f(0) * f(1)).sin()
            + 20.0 * (f(2) - 0.5).powi(2)
            + 10.0 * f(3)
            + 5.0 * f(4);
        y.push(signal + normal.sample(&mut rng));
        rows.push(x);
    }
    Dataset::from_rows(&rows, y)
}

/// Same shape as a 6,574 × 14 wind-speed table.
pub fn wind_like(seed: u64) -> Result<Dataset> {
    friedman_like(6574, 14, 1.0, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_determinism() {
        let a = wind_like(3).unwrap();
        assert_eq!((a.n_rows(), a.n_features()), (6574, 14));
        let b = friedman_like(50, 5, 1.0, 9).unwrap();
        let c = friedman_like(50, 5, 1.0, 9).unwrap();
        assert_eq!(b.response(), c.response());
    }
}
