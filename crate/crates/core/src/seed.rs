//! Seed derivation. Every random choice in the crate flows from a `u64`
//! through these helpers, so serial and parallel runs agree bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for stream `index` under `master`.
pub fn derive(master: u64, index: u64) -> u64 {
    mix64(mix64(master) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}
