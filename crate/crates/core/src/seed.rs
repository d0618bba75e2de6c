//! Deterministic sub-seed derivation.
//!
//! Every stochastic step takes its RNG from `(global seed, label)`, so the
//! same top-level seed reproduces every number regardless of execution
//! order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Stable 64-bit hash of a list of string parts.
pub fn stable_hash(parts: &[&str]) -> u64 {
    let mut hasher = Sha256::new();
    for p in parts {
        hasher.update((p.len() as u64).to_le_bytes());
        hasher.update(p.as_bytes());
    }
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn derive_seed(seed: u64, label: &str) -> u64 {
    stable_hash(&[&seed.to_string(), label])
}

pub fn rng_for(seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, label))
}

/// Short hex digest of any serializable config, stamped on report rows.
pub fn config_hash<T: serde::Serialize>(config: &T) -> String {
    let json = serde_json::to_string(config).unwrap_or_default();
    let digest = Sha256::digest(json.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}
