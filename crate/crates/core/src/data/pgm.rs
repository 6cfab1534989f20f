//! Binary PGM (`P5`) dumps of single images and image grids.

use std::path::Path;

use crate::permkit::{Dims, GrayImage};
use crate::{Error, Result};

pub fn pgm_bytes(dims: Dims, pixels: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", dims.cols, dims.rows).into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// Tiles `rows` of images side by side with a one-pixel white gutter.
pub fn grid(rows: &[Vec<GrayImage>]) -> Result<GrayImage> {
    let first = rows
        .first()
        .and_then(|r| r.first())
        .ok_or_else(|| Error::invalid("empty image grid"))?;
    let d = first.dims();
    let ncols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let gdims = Dims::new(rows.len() * (d.rows + 1) - 1, ncols * (d.cols + 1) - 1)?;
    let mut px = vec![255u8; gdims.cells()];
    for (gi, row) in rows.iter().enumerate() {
        for (gj, im) in row.iter().enumerate() {
            if im.dims() != d {
                return Err(Error::dims(d, im.dims()));
            }
            for i in 0..d.rows {
                let dst = (gi * (d.rows + 1) + i) * gdims.cols + gj * (d.cols + 1);
                px[dst..dst + d.cols].copy_from_slice(&im.pixels()[i * d.cols..(i + 1) * d.cols]);
            }
        }
    }
    GrayImage::new(gdims, px)
}

pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    std::fs::write(path, pgm_bytes(img.dims(), img.pixels())).map_err(|e| Error::io(path, e))
}
