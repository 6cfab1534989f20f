use serde::{Deserialize, Serialize};

use crate::permkit::GrayImage;
use crate::rng::SplitMix64;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissimilarityReport {
    pub mismatches: usize,
    pub cells: usize,
    /// `mismatches / cells`.
    pub rate: f64,
}

/// Δd: the number of positions holding different intensities.
pub fn dissimilarity(a: &GrayImage, b: &GrayImage) -> Result<DissimilarityReport> {
    if a.dims() != b.dims() {
        return Err(Error::dims(a.dims(), b.dims()));
    }
    let mismatches = a.pixels().iter().zip(b.pixels()).filter(|(x, y)| x != y).count();
    let cells = a.dims().cells();
    Ok(DissimilarityReport {
        mismatches,
        cells,
        rate: mismatches as f64 / cells as f64,
    })
}

pub fn intensity_histogram(img: &GrayImage) -> [u64; 256] {
    let mut h = [0u64; 256];
    for &p in img.pixels() {
        h[p as usize] += 1;
    }
    h
}

/// Summed histogram over many images.
pub fn corpus_histogram<'a>(images: impl IntoIterator<Item = &'a GrayImage>) -> [u64; 256] {
    let mut h = [0u64; 256];
    for im in images {
        for (acc, c) in h.iter_mut().zip(intensity_histogram(im)) {
            *acc += c;
        }
    }
    h
}

/// Match rate between two independent streams of uniform bytes over
/// `positions` positions, with the binomial standard deviation expected at
/// `p = 1/256`.
pub fn uniform_match_rate(positions: usize, seed: u64) -> (f64, f64) {
    let mut a = SplitMix64::stream(seed, 0);
    let mut b = SplitMix64::stream(seed, 1);
    let hits = (0..positions).filter(|_| a.next_u32() as u8 == b.next_u32() as u8).count();
    let p = 1.0 / 256.0;
    let sigma = (p * (1.0 - p) / positions as f64).sqrt();
    (hits as f64 / positions as f64, sigma)
}
