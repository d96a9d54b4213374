//! Seeded random streams. Every consumer derives an independent ChaCha
//! stream from the master seed and a fixed stream id, so results never
//! depend on scheduling or thread count.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) const STREAM_UB_ROWS: u64 = 1;
pub(crate) const STREAM_LB_DIMS: u64 = 2;
pub(crate) const STREAM_TSE_BASE: u64 = 1 << 20;
pub(crate) const STREAM_BOOTSTRAP_BASE: u64 = 1 << 32;
pub(crate) const STREAM_TRIAL_BASE: u64 = 1 << 40;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `amount` distinct indices from `0..len`, sorted ascending.
pub(crate) fn sample_sorted(rng: &mut ChaCha8Rng, len: usize, amount: usize) -> Vec<usize> {
    let mut picked = index::sample(rng, len, amount).into_vec();
    picked.sort_unstable();
    picked
}
