//! Seeded random stream shared by the sampler and the population generator.
//!
//! The stream is ChaCha8 (`rand_chacha`) seeded through `seed_from_u64`.
//! Uniform variates are built from the top 53 bits of each `u64` so the
//! mapping from raw stream to floats is fixed and documented.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Identifier written into generated artifacts.
pub const RNG_ALGORITHM: &str = "chacha8/seed_from_u64/u53-midpoint";

pub struct Stream(ChaCha8Rng);

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform on the open interval (0, 1): (k + 1/2)·2⁻⁵³ for k < 2⁵³.
    pub fn uniform_open(&mut self) -> f64 {
        let k = self.0.next_u64() >> 11;
        (k as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n` by rejection, `n > 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let x = self.0.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }
}
