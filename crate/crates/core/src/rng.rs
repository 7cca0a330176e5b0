//! Random streams and the seed-splitting rule.
//!
//! Every independent stream in the crate (a harness replication, one
//! finite-difference evaluation, ...) is derived from a base seed and a
//! path of indices by hashing them with SHA-256:
//!
//! ```text
//! digest = SHA-256("smc-score/stream/v1" || base || len(path) || path[0] || path[1] || ...)
//! seed   = first 8 bytes of digest, little endian
//! ```
//!
//! with every integer encoded as 8 little-endian bytes. The resulting
//! `u64` seeds a [`StreamRng`] (ChaCha with 8 rounds).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Generator used for every simulation stream.
pub type StreamRng = ChaCha8Rng;

const DOMAIN: &[u8] = b"smc-score/stream/v1";

/// Derives a child seed from `base` and an index path.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    let mut h = Sha256::new();
    h.update(DOMAIN);
    h.update(base.to_le_bytes());
    h.update((path.len() as u64).to_le_bytes());
    for p in path {
        h.update(p.to_le_bytes());
    }
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn stream(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}

/// Convenience for `stream(derive_seed(base, path))`.
pub fn child_stream(base: u64, path: &[u64]) -> StreamRng {
    stream(derive_seed(base, path))
}
