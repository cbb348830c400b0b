//! Seed derivation and counter-based sub-streams.
//!
//! Every source of randomness in the crate is a ChaCha8 stream whose seed is
//! derived from one user-supplied 64-bit seed plus a list of integer tags
//! (stream id, N, replicate index, ...). Worker threads never share streams,
//! so results do not depend on scheduling or thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids, one per independent consumer of randomness.
pub mod streams {
    pub const CAPACITIES: u64 = 1;
    pub const PRG: u64 = 2;
    pub const BERNOULLI: u64 = 3;
    pub const PAIRS: u64 = 4;
    pub const BP: u64 = 5;
    pub const NR: u64 = 6;
    pub const COUPLE_ROW: u64 = 7;
    pub const ROOT: u64 = 8;
}

/// SplitMix64 step; the standard finalizer keeps short tag lists well mixed.
#[inline]
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with integer tags into a derived 64-bit seed.
pub fn derive(seed: u64, tags: &[u64]) -> u64 {
    let mut acc = splitmix64(seed);
    for &t in tags {
        acc = splitmix64(acc ^ t.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    }
    acc
}

/// A dedicated ChaCha8 stream for `(seed, tags...)`.
pub fn stream(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, tags))
}

/// Uniform in `[0, 1)` keyed by an unordered node pair; identical no matter
/// which endpoint enumerates the pair.
pub fn pair_uniform(seed: u64, i: usize, j: usize) -> f64 {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    let h = derive(seed, &[streams::PAIRS, a as u64, b as u64]);
    u64_to_unit(h)
}

/// Maps a 64-bit word to a double in `[0, 1)` using the top 53 bits.
#[inline]
pub fn u64_to_unit(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
