//! Seeded synthetic series for demos and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::types::Sample;

/// Period of the seasonal component of [`seasonal_series`].
pub const SEASON: usize = 12;

/// Strictly positive multivariate series: feature 0 is a seasonal signal around
/// 5 with noise, further features are bounded random walks around 3.
pub fn seasonal_series(timesteps: usize, features: usize, seed: u64) -> Sample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut walks = vec![3.0f64; features.saturating_sub(1)];
    let mut values = Vec::with_capacity(timesteps * features);
    for t in 0..timesteps {
        let phase = 2.0 * std::f64::consts::PI * t as f64 / SEASON as f64;
        values.push(5.0 + phase.sin() + rng.random_range(-0.3..0.3));
        for w in walks.iter_mut() {
            *w = (*w + rng.random_range(-0.4..0.4)).clamp(1.0, 5.0);
            values.push(*w);
        }
    }
    Sample::from_flat(timesteps, features, values).expect("finite by construction")
}

/// Positive values in `[lo, hi)` with no structure.
pub fn uniform_sample(timesteps: usize, features: usize, lo: f64, hi: f64, seed: u64) -> Sample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..timesteps * features).map(|_| rng.random_range(lo..hi)).collect();
    Sample::from_flat(timesteps, features, values).expect("finite by construction")
}
