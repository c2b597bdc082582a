//! Shared generators for the micro-benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deterministic Gaussian stream of `n` samples in dimension `d`.
pub fn gaussian_stream(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect()
}

/// Deterministic {0,1}^d stream of `n` samples with success rate `p`.
pub fn bernoulli_stream(n: usize, d: usize, p: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            (0..d)
                .map(|_| if rng.random::<f64>() < p { 1.0 } else { 0.0 })
                .collect()
        })
        .collect()
}

/// Strictly increasing event times at roughly unit rate.
pub fn event_stream(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = 0.0;
    (0..n)
        .map(|_| {
            t += rng.random_range(0.05..2.0);
            t
        })
        .collect()
}
