use super::xtea::{block_decrypt, block_encrypt, BlockKey, BLOCK_LEN};
use super::CryptoError;

/// Ciphertext length for a plaintext of `len` bytes.
pub fn cbc_padded_len(len: usize) -> usize {
    (len / BLOCK_LEN + 1) * BLOCK_LEN
}

/// CBC over XTEA with an all-zero IV and pad bytes equal to the pad length
/// (1..=8; a whole block when already aligned).
pub fn cbc_encrypt(key: &BlockKey, plaintext: &[u8]) -> Vec<u8> {
    let pad = BLOCK_LEN - plaintext.len() % BLOCK_LEN;
    let mut buf = Vec::with_capacity(plaintext.len() + pad);
    buf.extend_from_slice(plaintext);
    buf.resize(plaintext.len() + pad, pad as u8);

    let mut chain = 0u64;
    for chunk in buf.chunks_exact_mut(BLOCK_LEN) {
        let block = u64::from_be_bytes((&*chunk).try_into().expect("8-byte block"));
        chain = block_encrypt(key, block ^ chain);
        chunk.copy_from_slice(&chain.to_be_bytes());
    }
    buf
}

pub fn cbc_decrypt(key: &BlockKey, ciphertext: &[u8]) -> Result<Vec<u8>, CryptoError> {
    if ciphertext.is_empty() || ciphertext.len() % BLOCK_LEN != 0 {
        return Err(CryptoError::CiphertextLength(ciphertext.len()));
    }
    let mut out = Vec::with_capacity(ciphertext.len());
    let mut chain = 0u64;
    for chunk in ciphertext.chunks_exact(BLOCK_LEN) {
        let block = u64::from_be_bytes(chunk.try_into().expect("8-byte block"));
        out.extend_from_slice(&(block_decrypt(key, block) ^ chain).to_be_bytes());
        chain = block;
    }
    let pad = *out.last().expect("non-empty") as usize;
    if pad == 0 || pad > BLOCK_LEN || out[out.len() - pad..].iter().any(|&b| b as usize != pad) {
        return Err(CryptoError::Padding);
    }
    out.truncate(out.len() - pad);
    Ok(out)
}
