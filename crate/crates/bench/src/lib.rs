//! Shared fixtures for the workspace benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use confband::{Density, Sample};

/// A seeded standard normal sample of size `n`.
pub fn gaussian_sample(seed: u64, n: usize) -> Sample {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    Density::Gaussian { d: 1 }.sample_n(&mut rng, n)
}
