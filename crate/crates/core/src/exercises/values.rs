//! Answer-field value conventions: integers are decimal or `0x` hex,
//! SDES blocks are binary strings, byte strings are hex.

use num_bigint::BigUint;
use num_traits::Num;

/// Decimal, or hex with a `0x`/`0X` prefix. Surrounding whitespace is ignored.
pub fn parse_uint(text: &str) -> Option<BigUint> {
    let text = text.trim();
    let (digits, radix) = match text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
        Some(hex) => (hex, 16),
        None => (text, 10),
    };
    if digits.is_empty() || !digits.chars().all(|c| c.is_digit(radix)) {
        return None;
    }
    BigUint::from_str_radix(digits, radix).ok()
}

/// Signed decimal.
pub fn parse_i64(text: &str) -> Option<i64> {
    text.trim().parse().ok()
}

/// One to eight binary digits.
pub fn parse_bits8(text: &str) -> Option<u8> {
    let text = text.trim();
    if text.is_empty() || text.len() > 8 || !text.bytes().all(|b| b == b'0' || b == b'1') {
        return None;
    }
    u8::from_str_radix(text, 2).ok()
}

pub fn format_bits(value: u32, width: usize) -> String {
    format!("{value:0width$b}")
}

/// Hex bytes, optionally `0x`-prefixed, whitespace ignored.
pub fn parse_hex_bytes(text: &str) -> Option<Vec<u8>> {
    let compact: String = text.split_whitespace().collect();
    let digits = compact.strip_prefix("0x").unwrap_or(&compact);
    hex::decode(digits).ok()
}
