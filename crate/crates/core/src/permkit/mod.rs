//! Permutation boxes over image cells and the multi-round permutation cipher.
//!
//! A [`PBox`] is a bijective position table: applying it moves the pixel at
//! cell `i` to cell `table[i]`. Keys come from one of four [`PatternSpec`]
//! generators; [`encrypt_rounds`] chains fresh round keys from the continuing
//! generator state.

mod generators;
mod rounds;
mod schedule;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use generators::{
    gcbpm_index_bits, gen_pbox, gray, gray_inverse, rank_permutation, GeneratorState,
    PatternKind, PatternSpec, CML_LAMBDA, LOGISTIC_TRANSIENT, LORENZ_DT, LORENZ_TRANSIENT,
};
pub use rounds::{decrypt_rounds, encrypt_rounds, generate_schedule};
pub use schedule::{
    load_schedule, parse_schedule, read_schedule, save_schedule, write_schedule, PBX_MAGIC,
};

/// Image geometry: `rows` (M) by `cols` (N).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub rows: usize,
    pub cols: usize,
}

impl Dims {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!("dims must be positive, got {rows}x{cols}")));
        }
        Ok(Self { rows, cols })
    }

    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

/// An 8-bit grayscale image stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    dims: Dims,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(dims: Dims, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != dims.cells() {
            return Err(Error::dims(
                format!("{} pixels for {dims}", dims.cells()),
                format!("{} pixels", pixels.len()),
            ));
        }
        Ok(Self { dims, pixels })
    }

    pub fn zeros(dims: Dims) -> Self {
        Self {
            dims,
            pixels: vec![0; dims.cells()],
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.dims.cols + col]
    }
}

/// A bijective position table over `dims.cells()` cells.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PBox {
    dims: Dims,
    table: Vec<u32>,
}

impl PBox {
    /// Validates that `table` is a permutation of `0..dims.cells()`.
    pub fn new(dims: Dims, table: Vec<u32>) -> Result<Self> {
        let n = dims.cells();
        if table.len() != n {
            return Err(Error::dims(
                format!("table of {n} entries for {dims}"),
                format!("{} entries", table.len()),
            ));
        }
        let mut seen = vec![false; n];
        for (i, &t) in table.iter().enumerate() {
            let t = t as usize;
            if t >= n {
                return Err(Error::invalid(format!("entry {i} = {t} out of range 0..{n}")));
            }
            if std::mem::replace(&mut seen[t], true) {
                return Err(Error::invalid(format!("target {t} appears twice")));
            }
        }
        Ok(Self { dims, table })
    }

    pub fn identity(dims: Dims) -> Self {
        Self {
            dims,
            table: (0..dims.cells() as u32).collect(),
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.table.iter().enumerate().all(|(i, &t)| i == t as usize)
    }

    /// `T_k^{-1}`: `inverse.table[self.table[i]] == i`.
    pub fn inverse(&self) -> PBox {
        let mut inv = vec![0u32; self.table.len()];
        for (i, &t) in self.table.iter().enumerate() {
            inv[t as usize] = i as u32;
        }
        PBox {
            dims: self.dims,
            table: inv,
        }
    }

    /// The permutation equivalent to applying `self` first and `next` second.
    pub fn then(&self, next: &PBox) -> Result<PBox> {
        if self.dims != next.dims {
            return Err(Error::dims(self.dims, next.dims));
        }
        let table = self
            .table
            .iter()
            .map(|&t| next.table[t as usize])
            .collect();
        Ok(PBox {
            dims: self.dims,
            table,
        })
    }

    /// Moves each value at `i` to `table[i]`; works for any cell payload.
    pub fn permute<T: Copy + Default>(&self, cells: &[T]) -> Result<Vec<T>> {
        if cells.len() != self.table.len() {
            return Err(Error::dims(self.table.len(), cells.len()));
        }
        let mut out = vec![T::default(); cells.len()];
        for (&src, &dst) in cells.iter().zip(&self.table) {
            out[dst as usize] = src;
        }
        Ok(out)
    }
}

/// `C = T_k(M)`: output pixel at `p.table[i]` is input pixel `i`.
pub fn apply_pbox(img: &GrayImage, p: &PBox) -> Result<GrayImage> {
    if img.dims != p.dims {
        return Err(Error::dims(p.dims, img.dims));
    }
    Ok(GrayImage {
        dims: img.dims,
        pixels: p.permute(&img.pixels)?,
    })
}

pub fn invert_pbox(p: &PBox) -> PBox {
    p.inverse()
}
