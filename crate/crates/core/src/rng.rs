//! Keyed random streams.
//!
//! A stream is a pure function of a 64-bit seed and a short key path, so a
//! task can build its own generator without coordinating with other workers.
//! Results never depend on how tasks are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used everywhere in the crate.
pub type StreamRng = ChaCha8Rng;

/// Seed used when the caller does not provide one.
pub const DEFAULT_SEED: u64 = 0x5EED_1A7E_2024_0001;

/// Key tags separating independent uses of one master seed.
pub mod tag {
    pub const SAMPLE: u64 = 0x01;
    pub const REPLICATE: u64 = 0x02;
    pub const TEST: u64 = 0x03;
    pub const KSB3: u64 = 0x04;
    pub const RESAMPLE_X: u64 = 0x11;
    pub const RESAMPLE_Y: u64 = 0x12;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a seed and a key path into a single 64-bit value.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    let mut h = splitmix64(seed);
    for (i, &k) in path.iter().enumerate() {
        h = splitmix64(h ^ splitmix64(k.wrapping_add((i as u64 + 1) << 56)));
    }
    h
}

/// Build the generator for `(seed, path)`.
pub fn stream(seed: u64, path: &[u64]) -> StreamRng {
    let mut bytes = [0u8; 32];
    let mut h = derive_seed(seed, path);
    for chunk in bytes.chunks_exact_mut(8) {
        h = splitmix64(h);
        chunk.copy_from_slice(&h.to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}
