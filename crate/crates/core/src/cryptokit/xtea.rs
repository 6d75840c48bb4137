//! XTEA, 32 cycles, big-endian words.

const DELTA: u32 = 0x9E37_79B9;
const CYCLES: u32 = 32;

pub const BLOCK_LEN: usize = 8;

/// 128-bit block-cipher key.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockKey([u32; 4]);

impl BlockKey {
    pub fn from_bytes(bytes: [u8; 16]) -> Self {
        let mut words = [0u32; 4];
        for (word, chunk) in words.iter_mut().zip(bytes.chunks_exact(4)) {
            *word = u32::from_be_bytes(chunk.try_into().expect("4-byte chunk"));
        }
        BlockKey(words)
    }

    pub fn to_bytes(self) -> [u8; 16] {
        let mut out = [0u8; 16];
        for (chunk, word) in out.chunks_exact_mut(4).zip(self.0) {
            chunk.copy_from_slice(&word.to_be_bytes());
        }
        out
    }
}

impl std::fmt::Debug for BlockKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("BlockKey(<redacted>)")
    }
}

pub fn block_encrypt(key: &BlockKey, block: u64) -> u64 {
    let k = &key.0;
    let (mut v0, mut v1) = ((block >> 32) as u32, block as u32);
    let mut sum = 0u32;
    for _ in 0..CYCLES {
        v0 = v0.wrapping_add(
            (((v1 << 4) ^ (v1 >> 5)).wrapping_add(v1)) ^ sum.wrapping_add(k[(sum & 3) as usize]),
        );
        sum = sum.wrapping_add(DELTA);
        v1 = v1.wrapping_add(
            (((v0 << 4) ^ (v0 >> 5)).wrapping_add(v0))
                ^ sum.wrapping_add(k[((sum >> 11) & 3) as usize]),
        );
    }
    ((v0 as u64) << 32) | v1 as u64
}

pub fn block_decrypt(key: &BlockKey, block: u64) -> u64 {
    let k = &key.0;
    let (mut v0, mut v1) = ((block >> 32) as u32, block as u32);
    let mut sum = DELTA.wrapping_mul(CYCLES);
    for _ in 0..CYCLES {
        v1 = v1.wrapping_sub(
            (((v0 << 4) ^ (v0 >> 5)).wrapping_add(v0))
                ^ sum.wrapping_add(k[((sum >> 11) & 3) as usize]),
        );
        sum = sum.wrapping_sub(DELTA);
        v0 = v0.wrapping_sub(
            (((v1 << 4) ^ (v1 >> 5)).wrapping_add(v1)) ^ sum.wrapping_add(k[(sum & 3) as usize]),
        );
    }
    ((v0 as u64) << 32) | v1 as u64
}
