use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::arch::{build_decryptor, build_katan_model, build_simon_model, instantiate};
use crate::ndl::{
    evaluate, fit, save_checkpoint, BatchSource, FitConfig, Init, LossKind, Model, ModelSpec, OptimizerConfig,
    OptimizerState, OutputHead, TrainReport,
};
use crate::rng::mix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackTask {
    /// Cipher image → plain image.
    Decryptor,
    /// KATAN32 ciphertext → plaintext.
    Katan,
    /// SIMON32/64 plaintext ∥ ciphertext → key.
    Simon,
}

impl AttackTask {
    pub fn spec(self) -> ModelSpec {
        match self {
            AttackTask::Decryptor => build_decryptor(),
            AttackTask::Katan => build_katan_model(),
            AttackTask::Simon => build_simon_model(),
        }
    }

    pub fn head(self) -> OutputHead {
        match self {
            AttackTask::Katan => OutputHead::MeanLastAxis,
            _ => OutputHead::Identity,
        }
    }

    /// Hyperparameters reported for the full-scale experiments.
    pub fn default_config(self) -> TrainConfig {
        let (lr, batch_size, epochs, optimizer, init) = match self {
            AttackTask::Decryptor => (0.1, 2000, 1500, OptimizerKind::Adam, Init::XavierUniform),
            AttackTask::Katan => (0.001, 64, 3000, OptimizerKind::Sgd, Init::XavierNormalized),
            AttackTask::Simon => (0.1, 128, 5000, OptimizerKind::Adam, Init::XavierNormalized),
        };
        TrainConfig {
            lr,
            batch_size,
            epochs,
            seed: 0,
            optimizer,
            init,
            checkpoint: None,
            lr_decay: None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AttackTask::Decryptor => "decryptor",
            AttackTask::Katan => "katan",
            AttackTask::Simon => "simon",
        }
    }
}

impl std::str::FromStr for AttackTask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "decryptor" => Ok(AttackTask::Decryptor),
            "katan" => Ok(AttackTask::Katan),
            "simon" => Ok(AttackTask::Simon),
            other => Err(Error::invalid(format!("unknown task '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub optimizer: OptimizerKind,
    pub init: Init,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lr_decay: Option<f64>,
}

impl TrainConfig {
    pub fn validate(&self, allow_zero_epochs: bool) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.epochs == 0 && !allow_zero_epochs {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("learning rate {} must be positive", self.lr)));
        }
        if let Some(d) = self.lr_decay {
            if !(d > 0.0 && d <= 1.0) {
                return Err(Error::Config(format!("lr_decay {d} must lie in (0, 1]")));
            }
        }
        Ok(())
    }

    fn fit_config(&self, head: OutputHead) -> FitConfig {
        FitConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            optimizer: match self.optimizer {
                OptimizerKind::Sgd => OptimizerConfig::Sgd { lr: self.lr },
                OptimizerKind::Adam => OptimizerConfig::adam(self.lr),
            },
            loss: LossKind::Mse,
            head,
            lr_decay: self.lr_decay,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Holds the best-validation parameters.
    pub model: Model,
    pub report: TrainReport,
    pub optimizer: OptimizerState,
}

/// Seed of the weight initialization for a run seeded with `seed`.
pub fn init_seed(seed: u64) -> u64 {
    mix(seed, u64::MAX)
}

fn finish(model: Model, report: TrainReport, optimizer: OptimizerState, cfg: &TrainConfig) -> Result<TrainOutcome> {
    if let Some(path) = &cfg.checkpoint {
        save_checkpoint(&model, Some(&optimizer), path)?;
    }
    Ok(TrainOutcome { model, report, optimizer })
}

/// Trains a freshly initialized model for `task`.
pub fn train(
    task: AttackTask,
    train_set: &dyn BatchSource,
    val_set: Option<&dyn BatchSource>,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate(false)?;
    let mut model = instantiate(task.spec())?;
    model.init(cfg.init, init_seed(cfg.seed));
    let (report, opt) = fit(&mut model, &cfg.fit_config(task.head()), train_set, val_set)?;
    finish(model, report, opt, cfg)
}

/// Continues from `start`'s parameters. With `epochs = 0` only the
/// validation metrics of the starting model are reported.
pub fn transfer_train(
    start: &Model,
    task: AttackTask,
    train_set: &dyn BatchSource,
    val_set: Option<&dyn BatchSource>,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate(true)?;
    if start.spec() != &task.spec() {
        return Err(Error::ArchitectureMismatch(format!(
            "checkpoint architecture does not match the {} architecture",
            task.name()
        )));
    }
    let mut model = start.clone();
    let fit_cfg = cfg.fit_config(task.head());
    if cfg.epochs == 0 {
        let val = val_set.ok_or_else(|| Error::Config("zero-epoch transfer needs a validation set".into()))?;
        let m = evaluate(&model, val, LossKind::Mse, task.head(), 256)?;
        let report = TrainReport {
            history: Vec::new(),
            best_epoch: 0,
            best_val: Some(m),
            param_count: model.param_count(),
            wall_seconds: 0.0,
        };
        let opt = OptimizerState::new(fit_cfg.optimizer, model.param_count());
        return finish(model, report, opt, cfg);
    }
    let (report, opt) = fit(&mut model, &fit_cfg, train_set, val_set)?;
    finish(model, report, opt, cfg)
}
