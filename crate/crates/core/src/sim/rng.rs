//! Seeded ChaCha streams. Every random draw in the crate goes through here.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type Rng = ChaCha20Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Independent stream `stream` under `seed`.
pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A seed for an independent sub-experiment keyed by `key`.
pub fn derive_seed(seed: u64, key: u64) -> u64 {
    use rand::RngCore;
    stream(seed ^ 0x5eed_5eed_5eed_5eed, key).next_u64()
}
