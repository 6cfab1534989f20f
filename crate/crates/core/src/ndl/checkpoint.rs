//! NDL1 checkpoints.
//!
//! Layout (little-endian): magic `NDL1`, version byte, input rank `u32` and
//! dims `u32…`, layer count `u32`, one record per layer (tag byte plus its
//! fields), parameter count `u64`, then for every layer its weights and
//! biases as `f64`. An optimizer section follows: tag byte (0 none, 1 SGD,
//! 2 Adam), learning rate, and for Adam β₁, β₂, ε, step `u64`, m, v.

use std::path::Path;

use super::layers::{Activation, LayerSpec};
use super::model::{Model, ModelSpec};
use super::optim::OptimizerState;
use crate::{Error, Result};

pub const NDL_MAGIC: &[u8; 4] = b"NDL1";
pub const NDL_VERSION: u8 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u32).to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64s(&mut self, v: &[f64]) {
        v.iter().for_each(|&x| self.f64(x));
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let s = self.bytes.get(self.pos..self.pos + n).ok_or(Error::Parse {
            offset: self.pos as u64,
            detail: "checkpoint truncated".into(),
        })?;
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }
    fn err(&self, detail: impl Into<String>) -> Error {
        Error::Parse {
            offset: self.pos as u64,
            detail: detail.into(),
        }
    }
}

pub fn checkpoint_bytes(model: &Model, opt: Option<&OptimizerState>) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(NDL_MAGIC);
    w.u8(NDL_VERSION);
    let spec = model.spec();
    w.u32(spec.input_shape.len());
    spec.input_shape.iter().for_each(|&d| w.u32(d));
    w.u32(spec.layers.len());
    for layer in &spec.layers {
        match layer {
            LayerSpec::Dense { units, activation } => {
                w.u8(0);
                w.u32(*units);
                w.u8(activation.tag());
            }
            LayerSpec::PointwiseConv { filters, activation } => {
                w.u8(1);
                w.u32(*filters);
                w.u8(activation.tag());
            }
            LayerSpec::Flatten => w.u8(2),
            LayerSpec::Reshape { shape } => {
                w.u8(3);
                w.u32(shape.len());
                shape.iter().for_each(|&d| w.u32(d));
            }
            LayerSpec::Dropout { keep } => {
                w.u8(4);
                w.f64(*keep);
            }
        }
    }
    w.u64(model.param_count() as u64);
    for p in model.params() {
        w.f64s(&p.w);
        w.f64s(&p.b);
    }
    match opt {
        None => w.u8(0),
        Some(OptimizerState::Sgd { lr }) => {
            w.u8(1);
            w.f64(*lr);
        }
        Some(OptimizerState::Adam { lr, beta1, beta2, epsilon, m, v, t }) => {
            w.u8(2);
            w.f64s(&[*lr, *beta1, *beta2, *epsilon]);
            w.u64(*t);
            w.f64s(m);
            w.f64s(v);
        }
    }
    w.0
}

pub fn parse_checkpoint(bytes: &[u8]) -> Result<(Model, Option<OptimizerState>)> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != NDL_MAGIC {
        return Err(Error::Parse { offset: 0, detail: "bad magic, expected NDL1".into() });
    }
    let version = r.u8()?;
    if version != NDL_VERSION {
        return Err(Error::Parse {
            offset: 4,
            detail: format!("unsupported checkpoint version {version}"),
        });
    }
    let rank = r.u32()?;
    let input_shape = (0..rank).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
    let n_layers = r.u32()?;
    let mut layers = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let tag = r.u8()?;
        let layer = match tag {
            0 | 1 => {
                let units = r.u32()?;
                let act = r.u8()?;
                let activation = Activation::from_tag(act).ok_or_else(|| r.err(format!("bad activation tag {act}")))?;
                if tag == 0 {
                    LayerSpec::Dense { units, activation }
                } else {
                    LayerSpec::PointwiseConv { filters: units, activation }
                }
            }
            2 => LayerSpec::Flatten,
            3 => {
                let n = r.u32()?;
                LayerSpec::Reshape {
                    shape: (0..n).map(|_| r.u32()).collect::<Result<_>>()?,
                }
            }
            4 => LayerSpec::Dropout { keep: r.f64()? },
            t => return Err(r.err(format!("unknown layer tag {t}"))),
        };
        layers.push(layer);
    }
    let mut model = Model::new(ModelSpec { input_shape, layers })?;
    let count = r.u64()? as usize;
    if count != model.param_count() {
        return Err(r.err(format!(
            "parameter count {count} does not match the layer table ({})",
            model.param_count()
        )));
    }
    let mut params = model.params().to_vec();
    for p in params.iter_mut() {
        p.w = r.f64s(p.w.len())?;
        p.b = r.f64s(p.b.len())?;
    }
    model.set_params(params)?;
    let opt = match r.u8()? {
        0 => None,
        1 => Some(OptimizerState::Sgd { lr: r.f64()? }),
        2 => {
            let (lr, beta1, beta2, epsilon) = (r.f64()?, r.f64()?, r.f64()?, r.f64()?);
            let t = r.u64()?;
            Some(OptimizerState::Adam {
                lr,
                beta1,
                beta2,
                epsilon,
                t,
                m: r.f64s(count)?,
                v: r.f64s(count)?,
            })
        }
        t => return Err(r.err(format!("unknown optimizer tag {t}"))),
    };
    if r.pos != bytes.len() {
        return Err(r.err("trailing bytes after checkpoint"));
    }
    Ok((model, opt))
}

pub fn save_checkpoint(model: &Model, opt: Option<&OptimizerState>, path: &Path) -> Result<()> {
    std::fs::write(path, checkpoint_bytes(model, opt)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<(Model, Option<OptimizerState>)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_checkpoint(&bytes)
}
