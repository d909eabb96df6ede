//! Seed derivation. A master seed is split into independent substreams with
//! a SplitMix64 mix, so any replicate can be regenerated on its own.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of substream `(index, tag)` of `master`.
pub fn substream(master: u64, index: u64, tag: u64) -> u64 {
    let a = mix(master.wrapping_add(GOLDEN));
    let b = mix(a ^ index.wrapping_mul(GOLDEN).wrapping_add(1));
    mix(b ^ tag.wrapping_mul(0xD1B5_4A32_D192_ED03).wrapping_add(2))
}

/// The generator every seeded routine in the crate draws from.
pub fn generator(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
