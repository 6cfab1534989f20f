//! KATAN32: 32-bit block, 80-bit key, 254 rounds of two coupled NLFSRs.
//!
//! Register layout: plaintext bits 0..=18 load `L2`, bits 19..=31 load `L1`;
//! bit `i` of each register word is register cell `i`. Key bit `i` is bit `i`
//! of the 80-bit key integer.

use crate::{Error, Result};

pub const KATAN_ROUNDS: usize = 254;

const L1_MASK: u32 = (1 << 13) - 1;
const L2_MASK: u32 = (1 << 19) - 1;

/// Round-constant sequence from the 8-bit LFSR `x⁸ + x⁷ + x⁵ + x³ + 1`.
const IR: [u8; KATAN_ROUNDS] = ir_sequence();

const fn ir_sequence() -> [u8; KATAN_ROUNDS] {
    let mut s: u8 = 0xff;
    let mut out = [0u8; KATAN_ROUNDS];
    // the first LFSR output is dropped
    let mut i = 0;
    while i <= KATAN_ROUNDS {
        let bit = s & 1;
        if i > 0 {
            out[i - 1] = bit;
        }
        let fb = (s ^ (s >> 1) ^ (s >> 3) ^ (s >> 5)) & 1;
        s = (s >> 1) | (fb << 7);
        i += 1;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Katan80Key(u128);

impl Katan80Key {
    pub const BITS: usize = 80;

    pub fn new(value: u128) -> Result<Self> {
        if value >> 80 != 0 {
            return Err(Error::invalid(format!("KATAN key {value:#x} is wider than 80 bits")));
        }
        Ok(Katan80Key(value))
    }

    /// Ten octets, most significant first.
    pub fn from_bytes(b: [u8; 10]) -> Self {
        Katan80Key(b.iter().fold(0u128, |acc, &x| (acc << 8) | x as u128))
    }

    pub fn to_bytes(self) -> [u8; 10] {
        std::array::from_fn(|i| (self.0 >> (8 * (9 - i))) as u8)
    }

    pub fn value(self) -> u128 {
        self.0
    }

    fn subkeys(self) -> [u8; 2 * KATAN_ROUNDS] {
        let mut k = [0u8; 2 * KATAN_ROUNDS];
        for (i, b) in k.iter_mut().enumerate().take(80) {
            *b = (self.0 >> i) as u8 & 1;
        }
        for i in 80..k.len() {
            k[i] = k[i - 80] ^ k[i - 61] ^ k[i - 50] ^ k[i - 13];
        }
        k
    }
}

#[inline]
fn bit(x: u32, i: u32) -> u32 {
    (x >> i) & 1
}

pub fn katan32_encrypt(p: u32, key: Katan80Key) -> u32 {
    let k = key.subkeys();
    let mut l2 = p & L2_MASK;
    let mut l1 = p >> 19;
    for r in 0..KATAN_ROUNDS {
        let fa = bit(l1, 12) ^ bit(l1, 7) ^ (bit(l1, 8) & bit(l1, 5)) ^ (bit(l1, 3) & IR[r] as u32) ^ k[2 * r] as u32;
        let fb = bit(l2, 18) ^ bit(l2, 7) ^ (bit(l2, 12) & bit(l2, 10)) ^ (bit(l2, 8) & bit(l2, 3)) ^ k[2 * r + 1] as u32;
        l1 = ((l1 << 1) | fb) & L1_MASK;
        l2 = ((l2 << 1) | fa) & L2_MASK;
    }
    (l1 << 19) | l2
}

pub fn katan32_decrypt(c: u32, key: Katan80Key) -> u32 {
    let k = key.subkeys();
    let mut l2 = c & L2_MASK;
    let mut l1 = c >> 19;
    for r in (0..KATAN_ROUNDS).rev() {
        let (fb, fa) = (l1 & 1, l2 & 1);
        let p1 = l1 >> 1; // cells 0..=11 of the previous L1
        let p2 = l2 >> 1; // cells 0..=17 of the previous L2
        let l1_12 = fa ^ bit(p1, 7) ^ (bit(p1, 8) & bit(p1, 5)) ^ (bit(p1, 3) & IR[r] as u32) ^ k[2 * r] as u32;
        let l2_18 = fb ^ bit(p2, 7) ^ (bit(p2, 12) & bit(p2, 10)) ^ (bit(p2, 8) & bit(p2, 3)) ^ k[2 * r + 1] as u32;
        l1 = p1 | (l1_12 << 12);
        l2 = p2 | (l2_18 << 18);
    }
    (l1 << 19) | l2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn ir_prefix() {
        // first ten constants from the cipher's design document
        assert_eq!(&IR[..10], &[1, 1, 1, 1, 1, 1, 1, 0, 0, 0]);
    }

    #[test]
    fn known_vectors() {
        let ones = Katan80Key::new((1 << 80) - 1).unwrap();
        assert_eq!(katan32_encrypt(0, ones), 0x7e1f_f945);
        assert_eq!(katan32_encrypt(0xffff_ffff, Katan80Key::default()), 0x432e_61da);
    }

    #[test]
    fn round_trip_random() {
        let mut rng = SplitMix64::new(5);
        for _ in 0..10_000 {
            let p = rng.next_u32();
            let key = Katan80Key::new(((rng.next_u64() as u128) << 16 | rng.below(1 << 16) as u128) & ((1 << 80) - 1)).unwrap();
            assert_eq!(katan32_decrypt(katan32_encrypt(p, key), key), p);
        }
    }

    #[test]
    fn key_bytes_round_trip() {
        let k = Katan80Key::new(0x0123_4567_89ab_cdef_0011).unwrap();
        assert_eq!(k.to_bytes()[0], 0x01);
        assert_eq!(Katan80Key::from_bytes(k.to_bytes()), k);
        assert!(Katan80Key::new(1 << 80).is_err());
    }
}
