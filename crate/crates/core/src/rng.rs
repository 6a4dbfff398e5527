//! Seeded, label-separated random streams.
//!
//! Every random decision in the crate draws from a stream derived from a
//! [`Seed`] and a text label, so parallel workers never share a generator
//! and reruns are bit-identical.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    pub fn stream(self, label: &str) -> ChaCha8Rng {
        rng_stream(self, label)
    }

    /// A child seed for a sub-task, e.g. one repetition of the pipeline.
    pub fn derive(self, label: &str) -> Seed {
        let digest = key(self, label);
        Seed(u64::from_le_bytes(digest[..8].try_into().unwrap()))
    }
}

fn key(seed: Seed, label: &str) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(seed.0.to_le_bytes());
    h.update((label.len() as u64).to_le_bytes());
    h.update(label.as_bytes());
    h.finalize().into()
}

/// A ChaCha8 stream keyed by `SHA-256(seed ‖ label)`.
pub fn rng_stream(seed: Seed, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(key(seed, label))
}
