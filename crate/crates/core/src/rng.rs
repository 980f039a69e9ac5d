//! Counter-based random streams.
//!
//! Every random draw in the crate is addressed by `(seed, stream, index)`:
//! a ChaCha8 key derived from the seed, the stream id placed in the nonce, and
//! the draw index implied by the position in the keystream. Work is split into
//! fixed-size batches, one stream per batch (or per sample), so results do not
//! depend on how batches are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::ops::Range;

pub type StreamRng = ChaCha8Rng;

/// Purpose tags keep the streams of different consumers disjoint under one user seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Integration = 1,
    QuasiShift = 2,
    Simulation = 3,
    Configuration = 4,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// The random stream for `(seed, purpose, stream)`.
pub fn substream(seed: u64, purpose: Purpose, stream: u64) -> StreamRng {
    let key = splitmix64(seed ^ splitmix64(purpose as u64));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(stream);
    rng
}

/// Split `0..total` into consecutive batches of `batch` items, map each batch in
/// parallel and return the per-batch results in batch order.
pub fn par_batches<T, F>(total: u64, batch: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, Range<u64>) -> T + Sync + Send,
{
    assert!(batch > 0);
    let count = total.div_ceil(batch);
    (0..count)
        .into_par_iter()
        .map(|b| {
            let start = b * batch;
            let end = (start + batch).min(total);
            f(b, start..end)
        })
        .collect()
}
