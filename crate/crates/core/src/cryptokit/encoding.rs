use base64::engine::general_purpose::STANDARD;
use base64::Engine;

use super::CryptoError;

/// Line width of wrapped base64 output.
pub const BASE64_LINE_WIDTH: usize = 60;

/// Lowercase hex.
pub fn encode_hex(data: &[u8]) -> String {
    hex::encode(data)
}

pub fn decode_hex(text: &str) -> Result<Vec<u8>, CryptoError> {
    hex::decode(text).map_err(|err| match err {
        hex::FromHexError::InvalidHexCharacter { c, index } => CryptoError::Decode {
            offset: index,
            reason: format!("invalid hex character {c:?}"),
        },
        hex::FromHexError::OddLength => CryptoError::Decode {
            offset: text.len(),
            reason: "odd number of hex digits".into(),
        },
        other => CryptoError::Decode {
            offset: 0,
            reason: other.to_string(),
        },
    })
}

/// Standard base64 broken into lines of `width` characters, each ending in
/// a newline.
pub fn encode_base64_wrapped(data: &[u8], width: usize) -> String {
    assert!(width > 0, "zero line width");
    let flat = STANDARD.encode(data);
    let mut out = String::with_capacity(flat.len() + flat.len() / width + 1);
    for line in flat.as_bytes().chunks(width) {
        out.push_str(std::str::from_utf8(line).expect("base64 is ascii"));
        out.push('\n');
    }
    out
}

/// Decodes base64, ignoring line breaks. Error offsets refer to `text`.
pub fn decode_base64(text: &str) -> Result<Vec<u8>, CryptoError> {
    let mut offsets = Vec::with_capacity(text.len());
    let mut flat = String::with_capacity(text.len());
    for (i, c) in text.char_indices() {
        if c != '\n' && c != '\r' {
            offsets.push(i);
            flat.push(c);
        }
    }
    STANDARD.decode(flat.as_bytes()).map_err(|err| {
        let (pos, reason) = match err {
            base64::DecodeError::InvalidByte(pos, byte) => {
                (pos, format!("invalid byte {byte:#04x}"))
            }
            base64::DecodeError::InvalidLastSymbol(pos, byte) => {
                (pos, format!("invalid last symbol {byte:#04x}"))
            }
            base64::DecodeError::InvalidLength(len) => (len, "invalid length".to_string()),
            base64::DecodeError::InvalidPadding => (flat.len(), "invalid padding".to_string()),
        };
        CryptoError::Decode {
            offset: offsets.get(pos).copied().unwrap_or(text.len()),
            reason,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn transcript_challenge() {
        let bytes = decode_hex("e9b24781e1fc0037").unwrap();
        assert_eq!(bytes.len(), 8);
        assert_eq!(encode_hex(&bytes), "e9b24781e1fc0037");
        assert_eq!(decode_hex("E9B24781E1FC0037").unwrap(), bytes);
    }

    #[test]
    fn hex_errors_carry_offsets() {
        assert!(matches!(decode_hex("abc"), Err(CryptoError::Decode { .. })));
        match decode_hex("00zz") {
            Err(CryptoError::Decode { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn base64_wraps_at_60() {
        let text = encode_base64_wrapped(&[0x5a; 200], BASE64_LINE_WIDTH);
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[..lines.len() - 1].iter().all(|l| l.len() == 60));
        assert!(lines.last().unwrap().len() <= 60);
        assert_eq!(decode_base64(&text).unwrap(), vec![0x5a; 200]);
        assert_eq!(encode_base64_wrapped(&[], 60), "");
    }

    #[test]
    fn base64_error_offset_maps_back() {
        let text = "QUJD\nR!==";
        match decode_base64(text) {
            Err(CryptoError::Decode { offset, .. }) => assert_eq!(&text[offset..=offset], "!"),
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #[test]
        fn round_trips(data in proptest::collection::vec(any::<u8>(), 0..300)) {
            prop_assert_eq!(decode_hex(&encode_hex(&data)).unwrap(), data.clone());
            prop_assert_eq!(decode_base64(&encode_base64_wrapped(&data, 60)).unwrap(), data);
        }
    }
}
