//! Counter-based RNG substreams.
//!
//! Every random draw in an experiment comes from a ChaCha stream addressed by
//! `(master seed, stream id)`. Stream ids are built from the epoch index and
//! the link's `(sat, gu)` pair, so evaluating extra schemes or reordering the
//! work never perturbs the channel realizations.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type SimRng = ChaCha12Rng;

/// Stream id for the per-link channel draws of one epoch.
pub fn link_stream(epoch: u32, sat: usize, gu: usize) -> u64 {
    ((epoch as u64) << 40) | ((sat as u64 & 0xF_FFFF) << 20) | (gu as u64 & 0xF_FFFF)
}

/// Stream id for drawing the `index`-th oracle sub-instance. The top bit
/// keeps it disjoint from every [`link_stream`] id.
pub fn oracle_stream(index: usize) -> u64 {
    (1 << 63) | index as u64
}

/// Independent generator for `(master, stream)`.
pub fn substream(master: u64, stream: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(master);
    rng.set_stream(stream);
    rng
}
