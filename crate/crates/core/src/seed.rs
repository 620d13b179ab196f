//! Deterministic seed derivation.
//!
//! Every random stream in the crate is keyed by `(base seed, stream tag, index)`
//! so results never depend on iteration or thread order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream tags, one per independent consumer of randomness.
pub mod stream {
    pub const ARRAY: u64 = 0x01;
    pub const SAMPLE: u64 = 0x02;
    pub const SPLIT: u64 = 0x03;
    pub const COMPONENT_SHUFFLE: u64 = 0x04;
    pub const SUBSAMPLE: u64 = 0x05;
    pub const INIT: u64 = 0x06;
    pub const BATCH_ORDER: u64 = 0x07;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index)
}

pub fn rng_for(base: u64, stream: u64, index: u64) -> Rng {
    Rng::seed_from_u64(derive_seed(base, stream, index))
}
