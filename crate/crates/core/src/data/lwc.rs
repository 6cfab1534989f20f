//! KATAN plaintext-recovery and SIMON key-recovery corpora.
//!
//! Record `i` of a corpus draws its plaintext and a fresh key from
//! `SplitMix64::stream(seed, i)`, with indices running through train, then
//! validation, then test. Records are stored compactly and expanded to bit
//! vectors on demand.

use std::path::Path;

use rayon::prelude::*;

use super::manifest::{digest_parts, Counts, DatasetManifest};
use crate::lwc::{katan32_encrypt, simon32_encrypt, BitVector, Katan80Key, Simon64Key};
use crate::rng::SplitMix64;
use crate::{Error, Result};

pub const LWC_MAGIC: &[u8; 4] = b"LWC1";

pub const KATAN_TRAIN: usize = 1_470_000;
pub const KATAN_VAL: usize = 245_000;
pub const SIMON_TRAIN: usize = 2_000_000;
pub const SIMON_VAL: usize = 245_000;
pub const SIMON_TEST: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CipherId {
    Katan32 = 1,
    Simon32 = 2,
}

impl CipherId {
    pub fn from_byte(b: u8) -> Option<CipherId> {
        match b {
            1 => Some(CipherId::Katan32),
            2 => Some(CipherId::Simon32),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CipherId::Katan32 => "katan32",
            CipherId::Simon32 => "simon32",
        }
    }

    /// Widths of (input, target) in bits.
    pub fn widths(self) -> (usize, usize) {
        match self {
            CipherId::Katan32 => (32, 32),
            CipherId::Simon32 => (64, 64),
        }
    }
}

/// Ciphertext → plaintext under a per-record key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KatanRecord {
    pub plaintext: u32,
    pub key: Katan80Key,
    pub ciphertext: u32,
}

impl KatanRecord {
    pub fn generate(seed: u64, index: u64) -> Self {
        let mut rng = SplitMix64::stream(seed, index);
        let plaintext = rng.next_u32();
        let hi = rng.next_u64() as u128;
        let lo = (rng.next_u64() & 0xffff) as u128;
        let key = Katan80Key::new((hi << 16) | lo).expect("80-bit key");
        KatanRecord {
            plaintext,
            key,
            ciphertext: katan32_encrypt(plaintext, key),
        }
    }

    pub fn input(&self) -> BitVector {
        BitVector::from_u32(self.ciphertext)
    }

    pub fn target(&self) -> BitVector {
        BitVector::from_u32(self.plaintext)
    }

    pub fn is_consistent(&self) -> bool {
        katan32_encrypt(self.plaintext, self.key) == self.ciphertext
    }
}

/// Plaintext ∥ ciphertext → key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimonRecord {
    pub plaintext: u32,
    pub key: Simon64Key,
    pub ciphertext: u32,
}

impl SimonRecord {
    pub fn generate(seed: u64, index: u64) -> Self {
        let mut rng = SplitMix64::stream(seed, index);
        let plaintext = rng.next_u32();
        let key = Simon64Key::from_u64(rng.next_u64());
        SimonRecord {
            plaintext,
            key,
            ciphertext: simon32_encrypt(plaintext, key),
        }
    }

    pub fn input(&self) -> BitVector {
        BitVector::from_u32(self.plaintext).concat(&BitVector::from_u32(self.ciphertext))
    }

    pub fn target(&self) -> BitVector {
        BitVector::from_u128(self.key.to_u64() as u128, 64)
    }

    pub fn is_consistent(&self) -> bool {
        simon32_encrypt(self.plaintext, self.key) == self.ciphertext
    }
}

pub trait LwcRecord: Copy + Send + Sync {
    const CIPHER: CipherId;
    fn generate(seed: u64, index: u64) -> Self;
    fn input(&self) -> BitVector;
    fn target(&self) -> BitVector;
}

impl LwcRecord for KatanRecord {
    const CIPHER: CipherId = CipherId::Katan32;
    fn generate(seed: u64, index: u64) -> Self {
        KatanRecord::generate(seed, index)
    }
    fn input(&self) -> BitVector {
        KatanRecord::input(self)
    }
    fn target(&self) -> BitVector {
        KatanRecord::target(self)
    }
}

impl LwcRecord for SimonRecord {
    const CIPHER: CipherId = CipherId::Simon32;
    fn generate(seed: u64, index: u64) -> Self {
        SimonRecord::generate(seed, index)
    }
    fn input(&self) -> BitVector {
        SimonRecord::input(self)
    }
    fn target(&self) -> BitVector {
        SimonRecord::target(self)
    }
}

#[derive(Debug, Clone)]
pub struct LwcCorpus<R> {
    pub splits: Vec<Vec<R>>,
    pub manifest: DatasetManifest,
}

/// The LWC1 encoding of one split.
pub fn lwc_file_bytes<R: LwcRecord>(records: &[R]) -> Vec<u8> {
    let (wi, wt) = R::CIPHER.widths();
    let mut buf = Vec::with_capacity(13 + records.len() * (wi + wt) / 8);
    buf.extend_from_slice(LWC_MAGIC);
    buf.push(R::CIPHER as u8);
    buf.extend_from_slice(&(records.len() as u64).to_le_bytes());
    for r in records {
        buf.extend_from_slice(&r.input().pack());
        buf.extend_from_slice(&r.target().pack());
    }
    buf
}

/// Decoded LWC1 file: cipher id and (input, target) bit pairs.
pub fn parse_lwc_file(bytes: &[u8]) -> Result<(CipherId, Vec<(BitVector, BitVector)>)> {
    if bytes.get(..4) != Some(LWC_MAGIC.as_slice()) {
        return Err(Error::Parse { offset: 0, detail: "bad magic, expected LWC1".into() });
    }
    let cipher = bytes
        .get(4)
        .and_then(|&b| CipherId::from_byte(b))
        .ok_or(Error::Parse { offset: 4, detail: "unknown cipher id".into() })?;
    let count = bytes
        .get(5..13)
        .map(|b| u64::from_le_bytes(b.try_into().unwrap()))
        .ok_or(Error::Parse { offset: 5, detail: "header truncated".into() })? as usize;
    let (wi, wt) = cipher.widths();
    let (bi, bt) = (wi.div_ceil(8), wt.div_ceil(8));
    let expected = 13 + count * (bi + bt);
    if bytes.len() != expected {
        return Err(Error::Parse {
            offset: bytes.len().min(expected) as u64,
            detail: format!("file is {} bytes, header implies {expected}", bytes.len()),
        });
    }
    let recs = bytes[13..]
        .chunks_exact(bi + bt)
        .map(|c| Ok((BitVector::unpack(&c[..bi], wi)?, BitVector::unpack(&c[bi..], wt)?)))
        .collect::<Result<_>>()?;
    Ok((cipher, recs))
}

fn generate_split<R: LwcRecord>(seed: u64, start: usize, count: usize) -> Vec<R> {
    (start..start + count)
        .into_par_iter()
        .map(|i| R::generate(seed, i as u64))
        .collect()
}

fn build<R: LwcRecord>(counts: &[usize], seed: u64, name: &str) -> Result<LwcCorpus<R>> {
    if counts.contains(&0) {
        return Err(Error::invalid(format!("split counts must be positive, got {counts:?}")));
    }
    let mut start = 0;
    let splits: Vec<Vec<R>> = counts
        .iter()
        .map(|&c| {
            let s = generate_split(seed, start, c);
            start += c;
            s
        })
        .collect();
    let files: Vec<Vec<u8>> = splits.iter().map(|s| lwc_file_bytes(s)).collect();
    let manifest = DatasetManifest {
        corpus: name.into(),
        pattern: None,
        cipher: Some(R::CIPHER.name().into()),
        rounds: None,
        seed: Some(seed),
        counts: Counts {
            train: counts[0],
            val: counts[1],
            test: counts.get(2).copied(),
        },
        digest: digest_parts(files.iter().map(Vec::as_slice)),
    };
    Ok(LwcCorpus { splits, manifest })
}

pub fn build_katan_corpus(n_train: usize, n_val: usize, seed: u64) -> Result<LwcCorpus<KatanRecord>> {
    build(&[n_train, n_val], seed, "katan")
}

pub fn build_simon_corpus(
    n_train: usize,
    n_val: usize,
    n_test: usize,
    seed: u64,
) -> Result<LwcCorpus<SimonRecord>> {
    build(&[n_train, n_val, n_test], seed, "simon")
}

const SPLIT_NAMES: [&str; 3] = ["train", "val", "test"];

impl<R: LwcRecord> LwcCorpus<R> {
    /// Writes `train.lwc`, `val.lwc` (and `test.lwc`) plus `manifest.json`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, split) in SPLIT_NAMES.iter().zip(&self.splits) {
            let path = dir.join(format!("{name}.lwc"));
            std::fs::write(&path, lwc_file_bytes(split)).map_err(|e| Error::io(&path, e))?;
        }
        self.manifest.save(&dir.join("manifest.json"))
    }
}

/// Regenerates the records of a KATAN/SIMON manifest and checks its digest.
pub fn verify_manifest(m: &DatasetManifest) -> Result<bool> {
    let seed = m.seed.ok_or_else(|| Error::invalid("manifest has no seed"))?;
    let digest = match m.cipher.as_deref() {
        Some("katan32") => build_katan_corpus(m.counts.train, m.counts.val, seed)?.manifest.digest,
        Some("simon32") => {
            let test = m.counts.test.ok_or_else(|| Error::invalid("simon manifest needs a test count"))?;
            build_simon_corpus(m.counts.train, m.counts.val, test, seed)?.manifest.digest
        }
        other => return Err(Error::invalid(format!("manifest cipher {other:?} is not an LWC corpus"))),
    };
    Ok(digest == m.digest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lwc::{from_reals, to_reals};
    use std::collections::HashSet;

    #[test]
    fn katan_records_reencrypt() {
        let c = build_katan_corpus(500, 100, 11).unwrap();
        assert_eq!(c.splits[0].len(), 500);
        for r in c.splits.iter().flatten() {
            assert!(r.is_consistent());
            // bits round-trip through the real encoding
            let p = from_reals(&to_reals(&r.target()), 0.5).unwrap().to_u128() as u32;
            let k = katan32_encrypt(p, r.key);
            assert_eq!(BitVector::from_u32(k), r.input());
        }
        let again = build_katan_corpus(500, 100, 11).unwrap();
        assert_eq!(again.splits[0][0], c.splits[0][0]);
        assert_eq!(again.manifest.digest, c.manifest.digest);
    }

    #[test]
    fn simon_layout_and_disjoint_seeds() {
        let a = build_simon_corpus(300, 50, 20, 1).unwrap();
        let b = build_simon_corpus(300, 50, 20, 2).unwrap();
        assert_eq!(a.manifest.counts.test, Some(20));
        let r = a.splits[2][0];
        assert!(r.is_consistent());
        assert_eq!(r.input().to_u128() as u64, ((r.plaintext as u64) << 32) | r.ciphertext as u64);
        let ka: HashSet<u64> = a.splits.iter().flatten().map(|r| r.key.to_u64()).collect();
        assert!(b.splits.iter().flatten().all(|r| !ka.contains(&r.key.to_u64())));
    }

    #[test]
    fn lwc1_file_round_trip() {
        let c = build_simon_corpus(10, 2, 3, 5).unwrap();
        let bytes = lwc_file_bytes(&c.splits[0]);
        assert_eq!(&bytes[..5], b"LWC1\x02");
        assert_eq!(bytes.len(), 13 + 10 * 16);
        let (cipher, recs) = parse_lwc_file(&bytes).unwrap();
        assert_eq!(cipher, CipherId::Simon32);
        assert_eq!(recs[3].1, c.splits[0][3].target());
        assert!(parse_lwc_file(&bytes[..bytes.len() - 1]).is_err());
        assert!(verify_manifest(&c.manifest).unwrap());
    }

    #[test]
    fn worker_count_does_not_change_digest() {
        let a = crate::parallel::with_workers(1, || build_katan_corpus(2000, 10, 3).unwrap());
        let b = crate::parallel::with_workers(4, || build_katan_corpus(2000, 10, 3).unwrap());
        assert_eq!(a.manifest.digest, b.manifest.digest);
    }

    #[test]
    fn zero_count_rejected() {
        assert!(build_katan_corpus(0, 1, 0).is_err());
    }
}
