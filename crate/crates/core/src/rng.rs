//! Chunked random streams.
//!
//! A run of `trials` draws is cut into fixed-size chunks. Chunk `c` of a run
//! seeded with `seed` always reads from ChaCha8 stream `c` of key `seed`, so
//! the draws are a function of `(seed, chunk)` alone. Chunks may execute on
//! any number of threads; results are folded back in chunk order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Trials per chunk. Part of the reproducibility contract: changing it
/// changes every Monte Carlo result.
pub const CHUNK_SIZE: u64 = 1 << 14;

/// Generator for one chunk of a seeded run.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Half-open trial ranges `(chunk index, first trial, count)` covering `trials`.
pub fn chunks(trials: u64) -> impl Iterator<Item = (u64, u64, u64)> + Clone {
    let n_chunks = trials.div_ceil(CHUNK_SIZE);
    (0..n_chunks).map(move |c| {
        let start = c * CHUNK_SIZE;
        (c, start, CHUNK_SIZE.min(trials - start))
    })
}

/// Runs `work(rng, count)` for every chunk on the current rayon pool and
/// folds the per-chunk results in chunk order.
pub fn run_chunked<T, W, M>(trials: u64, seed: u64, work: W, init: T, merge: M) -> T
where
    T: Send,
    W: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
    M: Fn(T, T) -> T,
{
    let parts: Vec<T> = chunks(trials)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(c, _, count)| {
            let mut rng = chunk_rng(seed, c);
            work(&mut rng, count)
        })
        .collect();
    parts.into_iter().fold(init, merge)
}
