//! Arithmetic and cipher kernel shared by the exercises and the real-time
//! protocol. Key sizes are pedagogical; nothing here is constant-time.

mod arith;
mod cbc;
mod encoding;
mod kdf;
mod prime;
mod sdes;
mod xtea;

pub use num_bigint::BigUint;

pub use arith::{bit_length, gcd, lcm, mod_inv, mod_pow, RsaPublicKey};
pub use cbc::{cbc_decrypt, cbc_encrypt, cbc_padded_len};
pub use encoding::{
    decode_base64, decode_hex, encode_base64_wrapped, encode_hex, BASE64_LINE_WIDTH,
};
pub use kdf::{hash_to_modulus, kdf};
pub use prime::{
    gen_prime, gen_safe_prime, is_prime, is_probable_prime, BitSource, DEFAULT_MR_ROUNDS,
};
pub use sdes::{sdes_decrypt, sdes_encrypt, sdes_encrypt_trace, sdes_subkeys, SdesKey, SdesTrace};
pub use xtea::{block_decrypt, block_encrypt, BlockKey, BLOCK_LEN};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CryptoError {
    #[error("modulus must be at least {min}")]
    Modulus { min: u32 },
    #[error("{a} has no inverse modulo {m}: gcd is {gcd}")]
    NotInvertible {
        a: BigUint,
        m: BigUint,
        gcd: BigUint,
    },
    #[error("invalid RSA key: {0}")]
    InvalidKey(&'static str),
    #[error("ciphertext length {0} is not a positive multiple of 8")]
    CiphertextLength(usize),
    #[error("malformed padding")]
    Padding,
    #[error("{value} does not fit in {bits} bits")]
    Width { value: u32, bits: u32 },
    #[error("decode error at offset {offset}: {reason}")]
    Decode { offset: usize, reason: String },
}
