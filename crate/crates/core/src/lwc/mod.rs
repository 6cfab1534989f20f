//! KATAN32 and SIMON32/64, plus the bit encodings used by the attack corpora.

mod bits;
mod katan;
mod simon;

pub use bits::{from_reals, to_reals, BitVector};
pub use katan::{katan32_decrypt, katan32_encrypt, Katan80Key, KATAN_ROUNDS};
pub use simon::{simon32_decrypt, simon32_encrypt, Simon64Key, SIMON_ROUNDS};

use crate::{Error, Result};

/// One line of a golden-vector file: `plaintext key ciphertext` in hex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GoldenVector {
    pub plaintext: u32,
    pub key: u128,
    pub ciphertext: u32,
}

/// Parses a golden-vector file. Blank lines and `#` comments are skipped.
pub fn parse_golden(text: &str) -> Result<Vec<GoldenVector>> {
    let mut out = Vec::new();
    let mut offset = 0u64;
    for line in text.split_inclusive('\n') {
        let at = offset;
        offset += line.len() as u64;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |detail: String| Error::Parse { offset: at, detail };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [pt, key, ct] = fields[..] else {
            return Err(bad(format!("expected 3 hex fields, found {}", fields.len())));
        };
        let hex32 = |s: &str| u32::from_str_radix(s, 16).map_err(|e| bad(format!("'{s}': {e}")));
        out.push(GoldenVector {
            plaintext: hex32(pt)?,
            key: u128::from_str_radix(key, 16).map_err(|e| bad(format!("'{key}': {e}")))?,
            ciphertext: hex32(ct)?,
        });
    }
    Ok(out)
}
