use num_bigint::BigUint;
use sha2::{Digest, Sha256};

use super::xtea::BlockKey;

/// First 16 bytes of
/// `SHA-256(label ‖ (0x00 ‖ len_be32(part) ‖ part)*)`.
pub fn kdf(label: &str, parts: &[&[u8]]) -> BlockKey {
    assert!(!label.is_empty(), "kdf label must not be empty");
    let mut hasher = Sha256::new();
    hasher.update(label.as_bytes());
    for part in parts {
        hasher.update([0u8]);
        hasher.update((part.len() as u32).to_be_bytes());
        hasher.update(part);
    }
    let digest = hasher.finalize();
    let mut key = [0u8; 16];
    key.copy_from_slice(&digest[..16]);
    BlockKey::from_bytes(key)
}

/// SHA-256 of `message` as a big-endian integer, reduced mod `n`.
pub fn hash_to_modulus(message: &[u8], n: &BigUint) -> BigUint {
    assert!(n >= &BigUint::from(2u32), "modulus below 2");
    BigUint::from_bytes_be(&Sha256::digest(message)) % n
}
