//! IDX containers (`0x00000803` images, `0x00000801` labels), optionally gzipped.

use std::io::{Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use crate::permkit::{Dims, GrayImage};
use crate::{Error, Result};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub dims: Dims,
    pub images: Vec<GrayImage>,
}

impl IdxImages {
    pub fn new(dims: Dims, images: Vec<GrayImage>) -> Result<Self> {
        if let Some(bad) = images.iter().find(|im| im.dims() != dims) {
            return Err(Error::dims(dims, bad.dims()));
        }
        Ok(IdxImages { dims, images })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// The first `n` images (all of them if `n` is larger).
    pub fn take(&self, n: usize) -> IdxImages {
        IdxImages {
            dims: self.dims,
            images: self.images.iter().take(n).cloned().collect(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(16 + self.len() * self.dims.cells());
        buf.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
        for v in [self.len(), self.dims.rows, self.dims.cols] {
            buf.extend_from_slice(&(v as u32).to_be_bytes());
        }
        for im in &self.images {
            buf.extend_from_slice(im.pixels());
        }
        buf
    }
}

fn be_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
        .ok_or(Error::Parse {
            offset: at as u64,
            detail: "header truncated".into(),
        })
}

fn check_magic(bytes: &[u8], want: u32) -> Result<()> {
    let magic = be_u32(bytes, 0)?;
    if magic != want {
        return Err(Error::Parse {
            offset: 0,
            detail: format!("bad magic {magic:#010x}, expected {want:#010x}"),
        });
    }
    Ok(())
}

fn check_payload(bytes: &[u8], header: usize, needed: usize) -> Result<()> {
    let have = bytes.len() - header;
    if have < needed {
        return Err(Error::Parse {
            offset: bytes.len() as u64,
            detail: format!("payload truncated: header promises {needed} bytes, found {have}"),
        });
    }
    Ok(())
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages> {
    check_magic(bytes, IDX_IMAGES_MAGIC)?;
    let count = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    let dims = Dims::new(rows, cols).map_err(|e| Error::Parse {
        offset: 8,
        detail: e.to_string(),
    })?;
    let cells = dims.cells();
    check_payload(bytes, 16, count * cells)?;
    let images = bytes[16..16 + count * cells]
        .chunks_exact(cells)
        .map(|px| GrayImage::new(dims, px.to_vec()))
        .collect::<Result<_>>()?;
    Ok(IdxImages { dims, images })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    check_magic(bytes, IDX_LABELS_MAGIC)?;
    let count = be_u32(bytes, 4)? as usize;
    check_payload(bytes, 8, count)?;
    Ok(bytes[8..8 + count].to_vec())
}

pub fn labels_to_bytes(labels: &[u8]) -> Vec<u8> {
    let mut buf = Vec::with_capacity(8 + labels.len());
    buf.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    buf.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    buf.extend_from_slice(labels);
    buf
}

/// Reads a whole file, transparently inflating gzip content.
pub fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let raw = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::io(path, e))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

/// Writes `bytes`, gzip-compressed when the path ends in `.gz`.
pub fn write_maybe_gz(path: &Path, bytes: &[u8]) -> Result<()> {
    let gz = path.extension().is_some_and(|e| e == "gz");
    let data = if gz {
        let mut enc = GzEncoder::new(Vec::new(), Compression::default());
        enc.write_all(bytes).map_err(|e| Error::io(path, e))?;
        enc.finish().map_err(|e| Error::io(path, e))?
    } else {
        bytes.to_vec()
    };
    std::fs::write(path, data).map_err(|e| Error::io(path, e))
}

pub fn read_idx(path: &Path) -> Result<IdxImages> {
    parse_idx_images(&read_maybe_gz(path)?)
}

pub fn write_idx(images: &IdxImages, path: &Path) -> Result<()> {
    write_maybe_gz(path, &images.to_bytes())
}

pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>> {
    parse_idx_labels(&read_maybe_gz(path)?)
}

pub fn write_idx_labels(labels: &[u8], path: &Path) -> Result<()> {
    write_maybe_gz(path, &labels_to_bytes(labels))
}
