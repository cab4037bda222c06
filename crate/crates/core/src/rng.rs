//! Deterministic stream derivation. Every stochastic component draws from a
//! ChaCha stream whose key is a SHA-256 hash of (master seed, purpose label,
//! replica index), so replica streams are independent, reproducible, and
//! stable under reordering of the work queue.

use rand_chacha::ChaCha12Rng;
use rand_chacha::rand_core::SeedableRng;
use sha2::{Digest, Sha256};

/// Derive the ChaCha key for a (seed, label, replica) triple.
fn derive_key(master_seed: u64, label: &str, replica: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update([0x1f]);
    h.update(label.as_bytes());
    h.update([0x1f]);
    h.update(replica.to_le_bytes());
    h.finalize().into()
}

/// A named substream of the master seed.
pub fn stream(master_seed: u64, label: &str, replica: u64) -> ChaCha12Rng {
    ChaCha12Rng::from_seed(derive_key(master_seed, label, replica))
}
