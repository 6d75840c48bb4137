//! Simplified DES: 8-bit blocks, 10-bit key, two Feistel rounds.
//!
//! Tables are 1-indexed from the most significant bit, as in the textbook
//! definition students work from.

use serde::{Deserialize, Serialize};

use super::CryptoError;

const P10: [u8; 10] = [3, 5, 2, 7, 4, 10, 1, 9, 8, 6];
const P8: [u8; 8] = [6, 3, 7, 4, 8, 5, 10, 9];
const IP: [u8; 8] = [2, 6, 3, 1, 4, 8, 5, 7];
const IP_INV: [u8; 8] = [4, 1, 3, 5, 7, 2, 8, 6];
const EP: [u8; 8] = [4, 1, 2, 3, 2, 3, 4, 1];
const P4: [u8; 4] = [2, 4, 3, 1];

const S0: [[u8; 4]; 4] = [[1, 0, 3, 2], [3, 2, 1, 0], [0, 2, 1, 3], [3, 1, 3, 2]];
const S1: [[u8; 4]; 4] = [[0, 1, 2, 3], [2, 0, 1, 3], [3, 0, 1, 0], [2, 1, 0, 3]];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SdesKey(u16);

impl SdesKey {
    pub fn new(bits: u16) -> Result<Self, CryptoError> {
        if bits >= 1 << 10 {
            return Err(CryptoError::Width {
                value: bits as u32,
                bits: 10,
            });
        }
        Ok(SdesKey(bits))
    }

    pub fn bits(self) -> u16 {
        self.0
    }
}

/// Every intermediate of one encryption.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct SdesTrace {
    pub K1: u8,
    pub K2: u8,
    pub IP: u8,
    pub fK1: u8,
    pub SW: u8,
    pub fK2: u8,
    pub c: u8,
}

impl SdesTrace {
    pub const PART_NAMES: [&'static str; 7] = ["K1", "K2", "IP", "fK1", "SW", "fK2", "c"];

    pub fn get(&self, part: &str) -> Option<u8> {
        Some(match part {
            "K1" => self.K1,
            "K2" => self.K2,
            "IP" => self.IP,
            "fK1" => self.fK1,
            "SW" => self.SW,
            "fK2" => self.fK2,
            "c" => self.c,
            _ => return None,
        })
    }
}

fn permute(input: u16, in_width: u8, table: &[u8]) -> u16 {
    table.iter().fold(0, |acc, &pos| {
        (acc << 1) | ((input >> (in_width - pos)) & 1)
    })
}

fn rotate5(half: u16, n: u32) -> u16 {
    ((half << n) | (half >> (5 - n))) & 0x1f
}

fn shift_halves(k: u16, n: u32) -> u16 {
    (rotate5(k >> 5, n) << 5) | rotate5(k & 0x1f, n)
}

/// Key schedule: `(K1, K2)`.
pub fn sdes_subkeys(key: SdesKey) -> (u8, u8) {
    let p10 = permute(key.0, 10, &P10);
    let once = shift_halves(p10, 1);
    let thrice = shift_halves(once, 2);
    (permute(once, 10, &P8) as u8, permute(thrice, 10, &P8) as u8)
}

fn sbox(table: &[[u8; 4]; 4], nibble: u8) -> u8 {
    let row = ((nibble >> 2) & 0b10) | (nibble & 1);
    let col = (nibble >> 1) & 0b11;
    table[row as usize][col as usize]
}

fn round_fn(right: u8, subkey: u8) -> u8 {
    let x = permute(right as u16, 4, &EP) as u8 ^ subkey;
    let joined = (sbox(&S0, x >> 4) << 2) | sbox(&S1, x & 0xf);
    permute(joined as u16, 4, &P4) as u8
}

fn fk(block: u8, subkey: u8) -> u8 {
    let (left, right) = (block >> 4, block & 0xf);
    ((left ^ round_fn(right, subkey)) << 4) | right
}

fn swap(block: u8) -> u8 {
    block.rotate_left(4)
}

pub fn sdes_encrypt_trace(key: SdesKey, plaintext: u8) -> SdesTrace {
    let (k1, k2) = sdes_subkeys(key);
    let ip = permute(plaintext as u16, 8, &IP) as u8;
    let fk1 = fk(ip, k1);
    let sw = swap(fk1);
    let fk2 = fk(sw, k2);
    let c = permute(fk2 as u16, 8, &IP_INV) as u8;
    SdesTrace {
        K1: k1,
        K2: k2,
        IP: ip,
        fK1: fk1,
        SW: sw,
        fK2: fk2,
        c,
    }
}

pub fn sdes_encrypt(key: SdesKey, plaintext: u8) -> u8 {
    sdes_encrypt_trace(key, plaintext).c
}

pub fn sdes_decrypt(key: SdesKey, ciphertext: u8) -> u8 {
    let (k1, k2) = sdes_subkeys(key);
    let ip = permute(ciphertext as u16, 8, &IP) as u8;
    let out = fk(swap(fk(ip, k2)), k1);
    permute(out as u16, 8, &IP_INV) as u8
}
