//! Counter-based RNG sub-streams.
//!
//! Every random quantity in a simulation is drawn from a ChaCha stream keyed by
//! the master seed and addressed by a path of integers (grid point, seed
//! index, frame, ...). Streams never overlap and do not depend on the order in
//! which they are consumed, so results are identical for any worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream tags for the different consumers of randomness.
pub mod tag {
    pub const FRAME: u64 = 0x4652_414d;
    pub const JITTER: u64 = 0x4a49_5454;
    pub const MONTE_CARLO: u64 = 0x4d43_4d43;
    pub const SWEEP: u64 = 0x5357_4550;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hashes a path of indices into a single 64-bit stream id.
pub fn stream_id(path: &[u64]) -> u64 {
    path.iter().fold(0x243f_6a88_85a3_08d3, |acc, &p| {
        splitmix64(acc ^ splitmix64(p))
    })
}

/// Independent generator for `(seed, path)`.
pub fn substream(seed: u64, path: &[u64]) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(path));
    rng
}

/// Derives a child seed, used when a whole nested computation needs its own
/// master seed (e.g. one sweep point and seed index).
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    splitmix64(seed ^ stream_id(path))
}
