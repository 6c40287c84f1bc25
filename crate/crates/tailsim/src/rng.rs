//! Counter-based random number streams.
//!
//! Every stream is keyed by `(seed, tag, index)` through SHA-256, so any
//! sample in the program can be regenerated without replaying what came
//! before it. Parallel and serial execution orders produce identical draws.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derives the 32-byte ChaCha key for `(seed, tag, index)`.
fn stream_key(seed: u64, tag: &str, index: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((tag.len() as u64).to_le_bytes());
    h.update(tag.as_bytes());
    h.update(index.to_le_bytes());
    h.finalize().into()
}

/// Returns the RNG for stream `(seed, tag, index)`.
pub fn stream_rng(seed: u64, tag: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(stream_key(seed, tag, index))
}

/// Returns a pair of independent RNGs for `(seed, tag, index)`.
///
/// Both use the same derived key on different ChaCha streams; one hash per
/// index instead of two. Used by per-draw samplers that need two sources.
pub fn stream_rng_pair(seed: u64, tag: &str, index: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let key = stream_key(seed, tag, index);
    let mut a = ChaCha8Rng::from_seed(key);
    let mut b = ChaCha8Rng::from_seed(key);
    a.set_stream(0);
    b.set_stream(1);
    (a, b)
}

/// Derives a child seed for an independent purpose, e.g. one seed per
/// replica or per sweep cell.
pub fn child_seed(seed: u64, tag: &str, index: u64) -> u64 {
    let key = stream_key(seed, tag, index);
    u64::from_le_bytes(key[..8].try_into().unwrap())
}
