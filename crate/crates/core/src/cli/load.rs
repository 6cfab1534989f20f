//! Dataset loading for run configs.

use std::path::Path;

use super::config::RunConfig;
use crate::attacks::{AttackTask, BitPairSource};
use crate::data::{build_pbox_corpus, parse_lwc_file, read_idx, read_idx_labels, read_maybe_gz, CipherId, IdxImages};
use crate::permkit::GrayImage;
use crate::{Error, Result};

pub struct ImageData {
    pub train_cipher: Vec<GrayImage>,
    pub train_plain: Vec<GrayImage>,
    pub val_cipher: Vec<GrayImage>,
    pub val_plain: Vec<GrayImage>,
    pub val_labels: Option<Vec<u8>>,
}

fn limited(images: IdxImages, limit: Option<usize>) -> IdxImages {
    match limit {
        Some(n) => images.take(n),
        None => images,
    }
}

fn required<'a>(p: &'a Option<std::path::PathBuf>, name: &str) -> Result<&'a Path> {
    p.as_deref().ok_or_else(|| Error::Config(format!("data.{name} is missing")))
}

fn check_pairs(cipher: &IdxImages, plain: &IdxImages, split: &str) -> Result<()> {
    if cipher.dims != plain.dims {
        return Err(Error::dims(plain.dims, cipher.dims));
    }
    if cipher.len() != plain.len() {
        return Err(Error::dims(
            format!("{} {split} cipher images", plain.len()),
            format!("{}", cipher.len()),
        ));
    }
    Ok(())
}

/// Reads (or encrypts) the train and validation image pairs of a config.
pub fn load_images(cfg: &RunConfig) -> Result<ImageData> {
    let d = &cfg.data;
    let train_plain = limited(read_idx(required(&d.train_plain, "train_plain")?)?, d.train_limit);
    let val_plain = limited(read_idx(required(&d.val_plain, "val_plain")?)?, d.val_limit);
    let (train_cipher, val_cipher) = match (&d.train_cipher, &d.val_cipher) {
        (Some(tc), Some(vc)) => (limited(read_idx(tc)?, d.train_limit), limited(read_idx(vc)?, d.val_limit)),
        _ => {
            let spec = cfg.generator.as_ref().ok_or_else(|| Error::Config("generator is missing".into()))?;
            let rounds = cfg.rounds.ok_or_else(|| Error::Config("rounds is missing".into()))?;
            let c = build_pbox_corpus(&train_plain, &val_plain, spec, rounds)?;
            (c.train_cipher, c.test_cipher)
        }
    };
    check_pairs(&train_cipher, &train_plain, "train")?;
    check_pairs(&val_cipher, &val_plain, "validation")?;
    let val_labels = match &d.val_labels {
        Some(p) => {
            let mut l = read_idx_labels(p)?;
            if l.len() < val_plain.len() {
                return Err(Error::dims(format!("{} labels", val_plain.len()), l.len()));
            }
            l.truncate(val_plain.len());
            Some(l)
        }
        None => None,
    };
    Ok(ImageData {
        train_cipher: train_cipher.images,
        train_plain: train_plain.images,
        val_cipher: val_cipher.images,
        val_plain: val_plain.images,
        val_labels,
    })
}

/// Reads an LWC1 split; KATAN inputs get the channel axis its model expects.
pub fn load_lwc_split(path: &Path, limit: Option<usize>) -> Result<(CipherId, BitPairSource)> {
    let (cipher, mut pairs) = parse_lwc_file(&read_maybe_gz(path)?)?;
    if let Some(n) = limit {
        pairs.truncate(n);
    }
    Ok((cipher, BitPairSource::new(pairs, cipher == CipherId::Katan32)?))
}

pub fn task_for(cipher: CipherId) -> AttackTask {
    match cipher {
        CipherId::Katan32 => AttackTask::Katan,
        CipherId::Simon32 => AttackTask::Simon,
    }
}

pub fn load_lwc(cfg: &RunConfig) -> Result<(BitPairSource, BitPairSource)> {
    let dir = required(&cfg.data.corpus, "corpus")?;
    let (ct, train) = load_lwc_split(&dir.join("train.lwc"), cfg.data.train_limit)?;
    let (cv, val) = load_lwc_split(&dir.join("val.lwc"), cfg.data.val_limit)?;
    if task_for(ct) != cfg.task || cv != ct {
        return Err(Error::ArchitectureMismatch(format!(
            "corpus holds {} records but the task is {}",
            ct.name(),
            cfg.task.name()
        )));
    }
    Ok((train, val))
}
