//! Named random sub-streams derived from a single root seed.
//!
//! Every randomized routine pulls its generator from here so that a run is
//! fully determined by `(root seed, stream name, index)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for stream `name`/`index` under `root`.
pub fn substream(root: u64, name: &str, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(splitmix(fnv1a(name.as_bytes()) ^ splitmix(index)));
    rng
}

/// A child seed, for handing to routines that take a seed rather than a generator.
pub fn derive_seed(root: u64, name: &str, index: u64) -> u64 {
    splitmix(root ^ splitmix(fnv1a(name.as_bytes()).wrapping_add(index)))
}
