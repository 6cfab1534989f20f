//! Cipher/plain image pairs for the permutation-cipher attacks.

use std::path::Path;

use super::idx::{write_idx, IdxImages};
use super::manifest::{digest_parts, Counts, DatasetManifest};
use crate::permkit::{encrypt_rounds, save_schedule, write_schedule, PBox, PatternSpec};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct PboxCorpus {
    pub train_cipher: IdxImages,
    pub train_plain: IdxImages,
    pub test_cipher: IdxImages,
    pub test_plain: IdxImages,
    pub keys: Vec<PBox>,
    pub manifest: DatasetManifest,
}

impl PboxCorpus {
    /// The bytes the digest covers, in order.
    fn digest(&self) -> String {
        let mut schedule = Vec::new();
        write_schedule(&mut schedule, &self.keys).expect("in-memory write");
        let parts = [
            self.train_cipher.to_bytes(),
            self.train_plain.to_bytes(),
            self.test_cipher.to_bytes(),
            self.test_plain.to_bytes(),
            schedule,
        ];
        digest_parts(parts.iter().map(Vec::as_slice))
    }

    /// Writes the four IDX files, the key schedule and the manifest into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_idx(&self.train_cipher, &dir.join("train-cipher-idx3-ubyte"))?;
        write_idx(&self.train_plain, &dir.join("train-plain-idx3-ubyte"))?;
        write_idx(&self.test_cipher, &dir.join("test-cipher-idx3-ubyte"))?;
        write_idx(&self.test_plain, &dir.join("test-plain-idx3-ubyte"))?;
        save_schedule(&dir.join("keys.pbx"), &self.keys)?;
        self.manifest.save(&dir.join("manifest.json"))
    }
}

/// Encrypts both splits with one chained schedule; ciphertext `i` pairs
/// with plaintext `i`.
pub fn build_pbox_corpus(
    train: &IdxImages,
    test: &IdxImages,
    spec: &PatternSpec,
    rounds: usize,
) -> Result<PboxCorpus> {
    if train.dims != test.dims {
        return Err(Error::dims(train.dims, test.dims));
    }
    let mut all = Vec::with_capacity(train.len() + test.len());
    all.extend_from_slice(&train.images);
    all.extend_from_slice(&test.images);
    let (mut cipher, keys) = encrypt_rounds(&all, spec, rounds)?;
    let test_cipher = cipher.split_off(train.len());
    let dims = train.dims;
    let mut corpus = PboxCorpus {
        train_cipher: IdxImages { dims, images: cipher },
        train_plain: train.clone(),
        test_cipher: IdxImages { dims, images: test_cipher },
        test_plain: test.clone(),
        keys,
        manifest: DatasetManifest {
            corpus: "pbox".into(),
            pattern: Some(spec.clone()),
            cipher: None,
            rounds: Some(rounds),
            seed: None,
            counts: Counts {
                train: train.len(),
                val: test.len(),
                test: None,
            },
            digest: String::new(),
        },
    };
    corpus.manifest.digest = corpus.digest();
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permkit::{decrypt_rounds, Dims, GrayImage, PatternKind};
    use crate::rng::SplitMix64;

    fn imgs(n: usize, seed: u64) -> IdxImages {
        let dims = Dims::new(28, 28).unwrap();
        let mut rng = SplitMix64::new(seed);
        let images = (0..n)
            .map(|_| GrayImage::new(dims, (0..784).map(|_| rng.below(256) as u8).collect()).unwrap())
            .collect();
        IdxImages::new(dims, images).unwrap()
    }

    #[test]
    fn sixteen_rounds_decrypt_back() {
        let (tr, te) = (imgs(20, 1), imgs(5, 2));
        let spec = PatternSpec::preset(PatternKind::Logistic);
        let c = build_pbox_corpus(&tr, &te, &spec, 16).unwrap();
        assert_eq!(c.keys.len(), 16);
        assert_eq!(decrypt_rounds(&c.train_cipher.images, &c.keys).unwrap(), tr.images);
        assert_eq!(decrypt_rounds(&c.test_cipher.images, &c.keys).unwrap(), te.images);
        let again = build_pbox_corpus(&tr, &te, &spec, 16).unwrap();
        assert_eq!(again.manifest.digest, c.manifest.digest);
        assert_eq!(c.manifest.digest.len(), 64);
    }

    #[test]
    fn histograms_preserved() {
        let (tr, te) = (imgs(3, 3), imgs(1, 4));
        let c = build_pbox_corpus(&tr, &te, &PatternSpec::preset(PatternKind::Cml), 1).unwrap();
        for (a, b) in c.train_cipher.images.iter().zip(&tr.images) {
            let mut x = a.pixels().to_vec();
            let mut y = b.pixels().to_vec();
            x.sort();
            y.sort();
            assert_eq!(x, y);
        }
    }

    #[test]
    fn dims_mismatch() {
        let small = IdxImages::new(Dims::new(2, 2).unwrap(), vec![]).unwrap();
        assert!(build_pbox_corpus(&imgs(1, 1), &small, &PatternSpec::preset(PatternKind::Cml), 1).is_err());
    }
}
