//! Seeded Gaussian streams.
//!
//! Each `(master_seed, stream_id)` pair selects an independent ChaCha20
//! keystream: the seed fixes the key and the stream id the nonce, so streams
//! never overlap.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// The same seed with the stream id moved by `k` (wrapping).
    pub fn offset(&self, k: u64) -> Self {
        Self {
            master_seed: self.master_seed,
            stream_id: self.stream_id.wrapping_add(k),
        }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// `n` i.i.d. standard normal variates drawn from `stream`.
pub fn gaussian_vector(stream: RngStream, n: usize) -> Vec<f64> {
    let mut rng = stream.rng();
    StandardNormal.sample_iter(&mut rng).take(n).collect()
}
