//! PBX1 key-schedule files.
//!
//! Layout, all integers little-endian `u32`: magic `PBX1`, rows, cols,
//! round count, then `rounds × rows·cols` table entries.

use std::io::{Read, Write};
use std::path::Path;

use super::{Dims, PBox};
use crate::{Error, Result};

pub const PBX_MAGIC: &[u8; 4] = b"PBX1";

pub fn write_schedule<W: Write>(mut w: W, keys: &[PBox]) -> std::io::Result<()> {
    let dims = keys.first().map(|k| k.dims());
    let (rows, cols) = dims.map_or((0, 0), |d| (d.rows, d.cols));
    let mut buf = Vec::with_capacity(16 + keys.len() * rows * cols * 4);
    buf.extend_from_slice(PBX_MAGIC);
    for v in [rows, cols, keys.len()] {
        buf.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for k in keys {
        for &t in k.table() {
            buf.extend_from_slice(&t.to_le_bytes());
        }
    }
    w.write_all(&buf)
}

pub fn read_schedule<R: Read>(mut r: R) -> Result<Vec<PBox>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)
        .map_err(|e| Error::Parse { offset: 0, detail: e.to_string() })?;
    parse_schedule(&bytes)
}

pub fn parse_schedule(bytes: &[u8]) -> Result<Vec<PBox>> {
    let word = |at: usize| -> Result<u32> {
        bytes
            .get(at..at + 4)
            .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
            .ok_or(Error::Parse {
                offset: at as u64,
                detail: "unexpected end of schedule".into(),
            })
    };
    if bytes.get(..4) != Some(PBX_MAGIC.as_slice()) {
        return Err(Error::Parse { offset: 0, detail: "bad magic, expected PBX1".into() });
    }
    let (rows, cols, rounds) = (word(4)? as usize, word(8)? as usize, word(12)? as usize);
    let dims = Dims::new(rows, cols).map_err(|e| Error::Parse { offset: 4, detail: e.to_string() })?;
    let cells = dims.cells();
    let expected = 16 + rounds * cells * 4;
    if bytes.len() != expected {
        return Err(Error::Parse {
            offset: bytes.len().min(expected) as u64,
            detail: format!("schedule length {} does not match header ({expected})", bytes.len()),
        });
    }
    (0..rounds)
        .map(|r| {
            let base = 16 + r * cells * 4;
            let table = (0..cells).map(|i| word(base + 4 * i)).collect::<Result<Vec<_>>>()?;
            PBox::new(dims, table).map_err(|e| Error::Parse {
                offset: base as u64,
                detail: format!("round {}: {e}", r + 1),
            })
        })
        .collect()
}

pub fn save_schedule(path: &Path, keys: &[PBox]) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_schedule(std::io::BufWriter::new(f), keys).map_err(|e| Error::io(path, e))
}

pub fn load_schedule(path: &Path) -> Result<Vec<PBox>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_schedule(&bytes)
}
