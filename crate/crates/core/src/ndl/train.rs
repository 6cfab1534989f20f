//! Mini-batch training loop with best-validation retention.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::gradcheck::{loss_and_grad, Target};
use super::layers::softmax;
use super::loss::LossKind;
use super::metrics::Metrics;
use super::model::{Mode, Model};
use super::optim::{OptimizerConfig, OptimizerState};
use super::tensor::Tensor;
use crate::rng::{mix, SplitMix64};
use crate::{Error, Result};

/// Random-access supplier of training examples.
pub trait BatchSource: Sync {
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// Inputs and targets of the examples `idx`, in that order.
    fn batch(&self, idx: &[usize]) -> Result<(Tensor, Target)>;
}

/// In-memory examples with regression targets.
pub struct TensorSource {
    pub x: Tensor,
    pub y: Tensor,
}

impl BatchSource for TensorSource {
    fn len(&self) -> usize {
        self.x.shape()[0]
    }
    fn batch(&self, idx: &[usize]) -> Result<(Tensor, Target)> {
        Ok((self.x.gather_rows(idx), Target::Values(self.y.gather_rows(idx))))
    }
}

/// In-memory examples with class labels.
pub struct LabelSource {
    pub x: Tensor,
    pub labels: Vec<usize>,
}

impl BatchSource for LabelSource {
    fn len(&self) -> usize {
        self.labels.len()
    }
    fn batch(&self, idx: &[usize]) -> Result<(Tensor, Target)> {
        Ok((
            self.x.gather_rows(idx),
            Target::Classes(idx.iter().map(|&i| self.labels[i]).collect()),
        ))
    }
}

/// Post-processing of the raw model output before the loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputHead {
    #[default]
    Identity,
    /// `[B, …, n, k] → [B, …, n]` by averaging the last axis.
    MeanLastAxis,
}

impl OutputHead {
    pub fn apply(self, y: &Tensor) -> Result<Tensor> {
        match self {
            OutputHead::Identity => Ok(y.clone()),
            OutputHead::MeanLastAxis => {
                let k = y.last_dim();
                let data = y.data().chunks(k).map(|c| c.iter().sum::<f64>() / k as f64).collect();
                let shape = y.shape()[..y.shape().len() - 1].to_vec();
                Tensor::new(shape, data)
            }
        }
    }

    fn backprop(self, raw: &Tensor, g: Tensor) -> Result<Tensor> {
        match self {
            OutputHead::Identity => Ok(g),
            OutputHead::MeanLastAxis => {
                let k = raw.last_dim();
                let data = g
                    .data()
                    .iter()
                    .flat_map(|&v| std::iter::repeat_n(v / k as f64, k))
                    .collect();
                Tensor::new(raw.shape().to_vec(), data)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerConfig,
    pub loss: LossKind,
    #[serde(default)]
    pub head: OutputHead,
    /// Multiplies the learning rate after every epoch when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lr_decay: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub val_loss: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mse: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mae: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub history: Vec<EpochRecord>,
    /// Epoch (1-based) whose parameters were kept; 0 means the initial ones.
    pub best_epoch: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_val: Option<Metrics>,
    pub param_count: usize,
    #[serde(skip)]
    pub wall_seconds: f64,
}

/// Streaming regression metrics.
#[derive(Debug, Clone, Default)]
struct Accumulator {
    n: f64,
    shift: Option<f64>,
    sum_t: f64,
    sum_t2: f64,
    ssr: f64,
    abs: f64,
    ape: f64,
    ape_n: f64,
    loss_sum: f64,
    rows: f64,
    correct: f64,
}

impl Accumulator {
    fn add(&mut self, pred: &[f64], target: &[f64]) {
        let c = *self.shift.get_or_insert_with(|| target.iter().sum::<f64>() / target.len() as f64);
        for (&p, &t) in pred.iter().zip(target) {
            let r = t - p;
            self.n += 1.0;
            self.sum_t += t - c;
            self.sum_t2 += (t - c) * (t - c);
            self.ssr += r * r;
            self.abs += r.abs();
            if t != 0.0 {
                self.ape += (r / t).abs();
                self.ape_n += 1.0;
            }
        }
    }

    fn finish(&self, loss: LossKind) -> Metrics {
        let mse = self.ssr / self.n;
        let sst = self.sum_t2 - self.sum_t * self.sum_t / self.n;
        let r2 = if sst <= 0.0 {
            if self.ssr == 0.0 { 1.0 } else { 0.0 }
        } else {
            1.0 - self.ssr / sst
        };
        Metrics {
            loss: match loss {
                LossKind::Mse => mse,
                LossKind::SparseCce => self.loss_sum / self.rows,
            },
            mse,
            r2,
            mae: self.abs / self.n,
            mape: if self.ape_n == 0.0 { 0.0 } else { 100.0 * self.ape / self.ape_n },
            rmse: mse.sqrt(),
            accuracy: match loss {
                LossKind::Mse => None,
                LossKind::SparseCce => Some(self.correct / self.rows),
            },
        }
    }
}

/// Eval-mode metrics over a whole source. Classification metrics other than
/// loss and accuracy are computed on softmax probabilities against one-hot
/// targets.
pub fn evaluate(
    model: &Model,
    source: &dyn BatchSource,
    loss: LossKind,
    head: OutputHead,
    batch_size: usize,
) -> Result<Metrics> {
    if source.is_empty() {
        return Err(Error::invalid("cannot evaluate on an empty source"));
    }
    let mut acc = Accumulator::default();
    let idx: Vec<usize> = (0..source.len()).collect();
    for chunk in idx.chunks(batch_size.max(1)) {
        let (x, target) = source.batch(chunk)?;
        let y = head.apply(&model.predict(&x)?)?;
        let (l, _) = loss_and_grad(&y, loss, &target)?;
        acc.loss_sum += l * chunk.len() as f64;
        acc.rows += chunk.len() as f64;
        match &target {
            Target::Values(t) => acc.add(y.data(), t.data()),
            Target::Classes(c) => {
                let w = y.last_dim();
                for (row, &label) in y.data().chunks(w).zip(c) {
                    let p = softmax(row);
                    let mut onehot = vec![0.0; w];
                    onehot[label] = 1.0;
                    acc.add(&p, &onehot);
                    acc.correct += (argmax(row) == label) as u8 as f64;
                }
            }
        }
    }
    Ok(acc.finish(loss))
}

pub fn argmax(row: &[f64]) -> usize {
    row.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
        .0
}

/// Trains `model` in place and leaves it holding the parameters of the best
/// validation epoch (or the last epoch without validation data).
pub fn fit(
    model: &mut Model,
    cfg: &FitConfig,
    train: &dyn BatchSource,
    val: Option<&dyn BatchSource>,
) -> Result<(TrainReport, OptimizerState)> {
    if cfg.batch_size == 0 || cfg.epochs == 0 {
        return Err(Error::invalid("epochs and batch size must be positive"));
    }
    if train.is_empty() {
        return Err(Error::invalid("empty training set"));
    }
    let started = Instant::now();
    let mut opt = OptimizerState::new(cfg.optimizer, model.param_count());
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, Metrics, Vec<super::model::LayerParams>)> = None;
    let n = train.len();
    for epoch in 0..cfg.epochs {
        let order = SplitMix64::stream(cfg.seed, epoch as u64).permutation(n);
        let order: Vec<usize> = order.into_iter().map(|i| i as usize).collect();
        let mut total = 0.0;
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let (x, target) = train.batch(chunk)?;
            let (raw, cache) = model.forward(&x, Mode::Train, mix(mix(cfg.seed, epoch as u64), b as u64))?;
            let y = cfg.head.apply(&raw)?;
            let (loss, g) = loss_and_grad(&y, cfg.loss, &target)?;
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch: epoch + 1, batch: b, loss });
            }
            total += loss * chunk.len() as f64;
            let grads = model.backward(&cache, &cfg.head.backprop(&raw, g)?)?;
            opt.step(model, &grads)?;
        }
        let train_loss = total / n as f64;
        let val_metrics = match val {
            Some(v) => Some(evaluate(model, v, cfg.loss, cfg.head, cfg.batch_size.max(256))?),
            None => None,
        };
        if let Some(m) = &val_metrics {
            if !m.loss.is_finite() {
                return Err(Error::Divergence { epoch: epoch + 1, batch: 0, loss: m.loss });
            }
            if best.as_ref().is_none_or(|(l, ..)| m.loss < *l) {
                best = Some((m.loss, epoch + 1, m.clone(), model.params().to_vec()));
            }
        }
        log::info!(
            "epoch {}/{}: train loss {train_loss:.6}{}",
            epoch + 1,
            cfg.epochs,
            val_metrics
                .as_ref()
                .map(|m| format!(", val loss {:.6}, val r2 {:.4}", m.loss, m.r2))
                .unwrap_or_default()
        );
        history.push(EpochRecord {
            epoch: epoch + 1,
            train_loss,
            val_loss: val_metrics.as_ref().map(|m| m.loss),
            r2: val_metrics.as_ref().map(|m| m.r2),
            mse: val_metrics.as_ref().map(|m| m.mse),
            mae: val_metrics.as_ref().map(|m| m.mae),
            accuracy: val_metrics.as_ref().and_then(|m| m.accuracy),
        });
        if let Some(d) = cfg.lr_decay {
            opt.set_lr(opt.lr() * d);
        }
    }
    let (best_epoch, best_val) = match best {
        Some((_, e, m, params)) => {
            model.set_params(params)?;
            (e, Some(m))
        }
        None => (cfg.epochs, None),
    };
    Ok((
        TrainReport {
            history,
            best_epoch,
            best_val,
            param_count: model.param_count(),
            wall_seconds: started.elapsed().as_secs_f64(),
        },
        opt,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ndl::{Activation, Init, LayerSpec, ModelSpec};

    fn linear_task(n: usize, seed: u64) -> TensorSource {
        let mut rng = SplitMix64::new(seed);
        let x: Vec<f64> = (0..n * 3).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let y = x.chunks(3).map(|r| 0.5 * r[0] - 2.0 * r[1] + r[2] + 0.3).collect();
        TensorSource {
            x: Tensor::new(vec![n, 3], x).unwrap(),
            y: Tensor::new(vec![n, 1], y).unwrap(),
        }
    }

    fn cfg(epochs: usize) -> FitConfig {
        FitConfig {
            epochs,
            batch_size: 16,
            optimizer: OptimizerConfig::adam(0.05),
            loss: LossKind::Mse,
            head: OutputHead::Identity,
            lr_decay: None,
            seed: 1,
        }
    }

    fn model() -> Model {
        let mut m = Model::new(ModelSpec {
            input_shape: vec![3],
            layers: vec![LayerSpec::dense(1, Activation::Linear)],
        })
        .unwrap();
        m.init(Init::XavierUniform, 0);
        m
    }

    #[test]
    fn learns_a_linear_map_deterministically() {
        let (tr, va) = (linear_task(256, 1), linear_task(64, 2));
        let mut a = model();
        let (rep, _) = fit(&mut a, &cfg(60), &tr, Some(&va)).unwrap();
        assert!(rep.best_val.as_ref().unwrap().r2 > 0.999, "{:?}", rep.best_val);
        let mut b = model();
        let (rep2, _) = fit(&mut b, &cfg(60), &tr, Some(&va)).unwrap();
        assert_eq!(a.params(), b.params());
        assert_eq!(serde_json::to_string(&rep).unwrap(), serde_json::to_string(&rep2).unwrap());
    }

    #[test]
    fn divergence_is_reported() {
        let tr = linear_task(64, 1);
        let mut m = model();
        let mut c = cfg(50);
        c.optimizer = OptimizerConfig::Sgd { lr: 1e6 };
        assert!(matches!(fit(&mut m, &c, &tr, None), Err(Error::Divergence { .. })));
    }

    #[test]
    fn mean_head() {
        let y = Tensor::new(vec![1, 2, 2], vec![1.0, 3.0, 5.0, 9.0]).unwrap();
        let h = OutputHead::MeanLastAxis.apply(&y).unwrap();
        assert_eq!(h.shape(), &[1, 2]);
        assert_eq!(h.data(), &[2.0, 7.0]);
        let g = OutputHead::MeanLastAxis.backprop(&y, Tensor::new(vec![1, 2], vec![1.0, 2.0]).unwrap()).unwrap();
        assert_eq!(g.data(), &[0.5, 0.5, 1.0, 1.0]);
    }
}
