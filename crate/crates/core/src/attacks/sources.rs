//! Batch sources that expand corpora into tensors on demand.

use crate::data::LwcRecord;
use crate::lwc::{to_reals, BitVector};
use crate::ndl::{BatchSource, Target, Tensor};
use crate::permkit::GrayImage;
use crate::{Error, Result};

/// Cipher image → plain image, pixels scaled to `[0, 1]`, shape `[B, M, N, 1]`.
pub struct ImagePairSource<'a> {
    cipher: &'a [GrayImage],
    plain: &'a [GrayImage],
}

impl<'a> ImagePairSource<'a> {
    pub fn new(cipher: &'a [GrayImage], plain: &'a [GrayImage]) -> Result<Self> {
        if cipher.len() != plain.len() {
            return Err(Error::invalid(format!(
                "{} cipher images but {} plain images",
                cipher.len(),
                plain.len()
            )));
        }
        Ok(ImagePairSource { cipher, plain })
    }
}

pub fn images_to_tensor(images: &[&GrayImage]) -> Result<Tensor> {
    let d = images
        .first()
        .ok_or_else(|| Error::invalid("no images"))?
        .dims();
    let mut data = Vec::with_capacity(images.len() * d.cells());
    for im in images {
        if im.dims() != d {
            return Err(Error::dims(d, im.dims()));
        }
        data.extend(im.pixels().iter().map(|&p| p as f64 / 255.0));
    }
    Tensor::new(vec![images.len(), d.rows, d.cols, 1], data)
}

impl BatchSource for ImagePairSource<'_> {
    fn len(&self) -> usize {
        self.cipher.len()
    }

    fn batch(&self, idx: &[usize]) -> Result<(Tensor, Target)> {
        let x: Vec<&GrayImage> = idx.iter().map(|&i| &self.cipher[i]).collect();
        let y: Vec<&GrayImage> = idx.iter().map(|&i| &self.plain[i]).collect();
        Ok((images_to_tensor(&x)?, Target::Values(images_to_tensor(&y)?)))
    }
}

/// Bit-vector records; inputs get a trailing unit axis when `channel_axis`.
pub struct LwcSource<'a, R> {
    records: &'a [R],
    channel_axis: bool,
}

impl<'a, R: LwcRecord> LwcSource<'a, R> {
    pub fn new(records: &'a [R], channel_axis: bool) -> Self {
        LwcSource { records, channel_axis }
    }

    pub fn inputs(&self, idx: &[usize]) -> Result<Tensor> {
        let (wi, _) = R::CIPHER.widths();
        let data = idx.iter().flat_map(|&i| to_reals(&self.records[i].input())).collect();
        let shape = if self.channel_axis {
            vec![idx.len(), wi, 1]
        } else {
            vec![idx.len(), wi]
        };
        Tensor::new(shape, data)
    }
}

impl<R: LwcRecord> BatchSource for LwcSource<'_, R> {
    fn len(&self) -> usize {
        self.records.len()
    }

    fn batch(&self, idx: &[usize]) -> Result<(Tensor, Target)> {
        let (_, wt) = R::CIPHER.widths();
        let y = idx.iter().flat_map(|&i| to_reals(&self.records[i].target())).collect();
        Ok((self.inputs(idx)?, Target::Values(Tensor::new(vec![idx.len(), wt], y)?)))
    }
}

/// Decoded LWC1 pairs, as read back from disk.
pub struct BitPairSource {
    pairs: Vec<(BitVector, BitVector)>,
    channel_axis: bool,
}

impl BitPairSource {
    pub fn new(pairs: Vec<(BitVector, BitVector)>, channel_axis: bool) -> Result<Self> {
        let first = pairs.first().ok_or_else(|| Error::invalid("no records"))?;
        let (wi, wt) = (first.0.width(), first.1.width());
        if pairs.iter().any(|(i, t)| i.width() != wi || t.width() != wt) {
            return Err(Error::invalid("records of mixed widths"));
        }
        Ok(BitPairSource { pairs, channel_axis })
    }

    pub fn pairs(&self) -> &[(BitVector, BitVector)] {
        &self.pairs
    }

    pub fn inputs(&self, idx: &[usize]) -> Result<Tensor> {
        let wi = self.pairs[0].0.width();
        let data = idx.iter().flat_map(|&i| to_reals(&self.pairs[i].0)).collect();
        let shape = if self.channel_axis {
            vec![idx.len(), wi, 1]
        } else {
            vec![idx.len(), wi]
        };
        Tensor::new(shape, data)
    }
}

impl BatchSource for BitPairSource {
    fn len(&self) -> usize {
        self.pairs.len()
    }

    fn batch(&self, idx: &[usize]) -> Result<(Tensor, Target)> {
        let wt = self.pairs[0].1.width();
        let y = idx.iter().flat_map(|&i| to_reals(&self.pairs[i].1)).collect();
        Ok((self.inputs(idx)?, Target::Values(Tensor::new(vec![idx.len(), wt], y)?)))
    }
}
