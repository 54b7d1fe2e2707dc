//! Seeded random streams whose output does not depend on the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Draws handled by one independent stream.
pub const CHUNK: usize = 1024;

pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Splits `n` draws into chunks of [`CHUNK`], each on its own stream, and returns the
/// per-chunk results in chunk order.
pub fn chunked<T, F>(seed: u64, n: usize, per_chunk: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, c as u64);
            let len = CHUNK.min(n - c * CHUNK);
            per_chunk(&mut rng, len)
        })
        .collect()
}
