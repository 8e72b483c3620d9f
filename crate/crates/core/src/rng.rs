//! Deterministic random streams.
//!
//! Every source of randomness in a run (noise process, initialization,
//! shuffling) owns its own stream so that the draw sequences are
//! independent and bitwise reproducible from a single 64-bit seed.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Scalar;

/// Substream identifiers carved out of one experiment seed.
pub mod stream {
    pub const NOISE: u64 = 0;
    pub const INIT: u64 = 1;
    pub const SHUFFLE: u64 = 2;
}

/// Seeded deterministic generator. Identical seeds (and stream ids) yield
/// bitwise-identical draw sequences; a stream is single-owner and must not
/// be shared between concurrent executions.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent substream of the same seed.
    pub fn with_stream(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw on the open interval (0, 1): safe as an argument of
    /// ln, tan and the other transforms the samplers apply.
    pub fn next_open01<T: Scalar>(&mut self) -> T {
        let bits = self.rng.next_u64() >> 12; // 52 random bits
        let u = (bits as f64 + 0.5) * (1.0 / (1u64 << 52) as f64);
        T::from_f64_c(u)
    }
}
