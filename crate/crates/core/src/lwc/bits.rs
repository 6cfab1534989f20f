//! Fixed-width bit strings, most significant bit first.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    bits: Vec<u8>,
}

impl BitVector {
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::invalid("bit values must be 0 or 1"));
        }
        Ok(BitVector { bits })
    }

    /// The low `width` bits of `value`, most significant first.
    pub fn from_u128(value: u128, width: usize) -> Self {
        assert!(width <= 128);
        BitVector {
            bits: (0..width).rev().map(|i| (value >> i) as u8 & 1).collect(),
        }
    }

    pub fn from_u32(value: u32) -> Self {
        Self::from_u128(value as u128, 32)
    }

    pub fn to_u128(&self) -> u128 {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | b as u128)
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Bits packed into octets, first bit in the top bit of the first octet.
    pub fn pack(&self) -> Vec<u8> {
        self.bits
            .chunks(8)
            .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | (b << (7 - i))))
            .collect()
    }

    pub fn unpack(bytes: &[u8], width: usize) -> Result<Self> {
        if bytes.len() * 8 < width {
            return Err(Error::invalid(format!("{} octets cannot hold {width} bits", bytes.len())));
        }
        Ok(BitVector {
            bits: (0..width).map(|i| (bytes[i / 8] >> (7 - i % 8)) & 1).collect(),
        })
    }

    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        BitVector { bits }
    }
}

pub fn to_reals(b: &BitVector) -> Vec<f64> {
    b.bits.iter().map(|&x| x as f64).collect()
}

/// Thresholds reals in `[0, 1]`; a value equal to `threshold` maps to 1.
pub fn from_reals(v: &[f64], threshold: f64) -> Result<BitVector> {
    if let Some((i, x)) = v.iter().enumerate().find(|(_, x)| !(0.0..=1.0).contains(*x)) {
        return Err(Error::invalid(format!("value {x} at position {i} is outside [0, 1]")));
    }
    Ok(BitVector {
        bits: v.iter().map(|&x| (x >= threshold) as u8).collect(),
    })
}
