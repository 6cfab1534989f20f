//! The JSON run document shared by `train`, `transfer` and `eval`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::attacks::{AttackTask, OptimizerKind, TrainConfig};
use crate::ndl::Init;
use crate::permkit::PatternSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: AttackTask,
    /// Key generator used to encrypt plain images on the fly when no cipher
    /// files are given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<PatternSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
    pub data: DataConfig,
    #[serde(default)]
    pub train: TrainOverrides,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub output: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_plain: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_cipher: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub val_plain: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub val_cipher: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub val_labels: Option<PathBuf>,
    /// Directory holding `train.lwc` and `val.lwc`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_limit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub val_limit: Option<usize>,
}

/// Fields left out fall back to the task defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<Init>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lr_decay: Option<f64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    /// Reads a config; relative paths are taken relative to the file.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = RunConfig::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(p) = p {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        };
        let d = &mut self.data;
        for p in [
            &mut d.train_plain,
            &mut d.train_cipher,
            &mut d.val_plain,
            &mut d.val_cipher,
            &mut d.val_labels,
            &mut d.corpus,
        ] {
            fix(p);
        }
        if self.output.is_relative() {
            self.output = base.join(&self.output);
        }
    }

    /// Structural checks that need no file access.
    pub fn check(&self) -> Result<()> {
        let d = &self.data;
        match self.task {
            AttackTask::Decryptor => {
                if d.train_plain.is_none() || d.val_plain.is_none() {
                    return Err(Error::Config("decryptor runs need data.train_plain and data.val_plain".into()));
                }
                let have_cipher = d.train_cipher.is_some() && d.val_cipher.is_some();
                if !have_cipher && (self.generator.is_none() || self.rounds.is_none()) {
                    return Err(Error::Config(
                        "give data.train_cipher and data.val_cipher, or generator and rounds".into(),
                    ));
                }
                if self.rounds == Some(0) {
                    return Err(Error::Config("rounds must be at least 1".into()));
                }
            }
            AttackTask::Katan | AttackTask::Simon => {
                if d.corpus.is_none() {
                    return Err(Error::Config(format!("{} runs need data.corpus", self.task.name())));
                }
            }
        }
        if d.train_limit == Some(0) || d.val_limit == Some(0) {
            return Err(Error::Config("limits must be positive".into()));
        }
        Ok(())
    }

    /// Task defaults with the overrides applied.
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        let o = &self.train;
        let mut c = self.task.default_config();
        c.lr = o.lr.unwrap_or(c.lr);
        c.batch_size = o.batch_size.unwrap_or(c.batch_size);
        c.epochs = o.epochs.unwrap_or(c.epochs);
        c.optimizer = o.optimizer.unwrap_or(c.optimizer);
        c.init = o.init.unwrap_or(c.init);
        c.lr_decay = o.lr_decay.or(c.lr_decay);
        c.seed = seed;
        c
    }

    /// The config with every training field and the seed spelled out.
    pub fn resolved(&self, seed: u64) -> RunConfig {
        let c = self.train_config(seed);
        let mut out = self.clone();
        out.seed = Some(seed);
        out.train = TrainOverrides {
            lr: Some(c.lr),
            batch_size: Some(c.batch_size),
            epochs: Some(c.epochs),
            optimizer: Some(c.optimizer),
            init: Some(c.init),
            lr_decay: c.lr_decay,
        };
        out
    }

    pub fn pattern_name(&self) -> String {
        self.generator
            .as_ref()
            .map(|g| g.kind().name().to_string())
            .unwrap_or_else(|| self.task.name().to_string())
    }
}
