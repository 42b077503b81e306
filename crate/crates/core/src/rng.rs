//! Seeded, splittable random streams.
//!
//! Every replicate of every experiment draws from its own ChaCha stream,
//! keyed by `(seed, stream)`, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs `f` over replicates `0..n` in parallel, each with its own stream.
/// The output order is the replicate order.
pub fn replicate<T, F>(seed: u64, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut SimRng) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            f(i, &mut rng)
        })
        .collect()
}

/// Like [`replicate`], on streams disjoint from those of other arms.
pub fn replicate_arm<T, F>(seed: u64, arm: u64, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut SimRng) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, (arm << 40) | i as u64);
            f(i, &mut rng)
        })
        .collect()
}
