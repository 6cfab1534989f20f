use serde::{Deserialize, Serialize};

use super::model::{Grads, LayerParams, Model};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum OptimizerConfig {
    Sgd { lr: f64 },
    Adam {
        lr: f64,
        #[serde(default = "d_beta1")]
        beta1: f64,
        #[serde(default = "d_beta2")]
        beta2: f64,
        #[serde(default = "d_eps")]
        epsilon: f64,
    },
}

fn d_beta1() -> f64 {
    0.9
}
fn d_beta2() -> f64 {
    0.999
}
fn d_eps() -> f64 {
    1e-8
}

impl OptimizerConfig {
    pub fn adam(lr: f64) -> Self {
        OptimizerConfig::Adam {
            lr,
            beta1: d_beta1(),
            beta2: d_beta2(),
            epsilon: d_eps(),
        }
    }

    pub fn lr(&self) -> f64 {
        match *self {
            OptimizerConfig::Sgd { lr } | OptimizerConfig::Adam { lr, .. } => lr,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OptimizerState {
    Sgd {
        lr: f64,
    },
    Adam {
        lr: f64,
        beta1: f64,
        beta2: f64,
        epsilon: f64,
        m: Vec<f64>,
        v: Vec<f64>,
        t: u64,
    },
}

impl OptimizerState {
    pub fn new(cfg: OptimizerConfig, param_count: usize) -> Self {
        match cfg {
            OptimizerConfig::Sgd { lr } => OptimizerState::Sgd { lr },
            OptimizerConfig::Adam { lr, beta1, beta2, epsilon } => OptimizerState::Adam {
                lr,
                beta1,
                beta2,
                epsilon,
                m: vec![0.0; param_count],
                v: vec![0.0; param_count],
                t: 0,
            },
        }
    }

    pub fn lr(&self) -> f64 {
        match *self {
            OptimizerState::Sgd { lr } | OptimizerState::Adam { lr, .. } => lr,
        }
    }

    pub fn set_lr(&mut self, new: f64) {
        match self {
            OptimizerState::Sgd { lr } | OptimizerState::Adam { lr, .. } => *lr = new,
        }
    }

    /// Updates `params` in place from `grads`.
    pub fn step_params(&mut self, params: &mut [LayerParams], grads: &Grads) -> Result<()> {
        if params.len() != grads.len()
            || params
                .iter()
                .zip(grads)
                .any(|(p, g)| p.w.len() != g.w.len() || p.b.len() != g.b.len())
        {
            return Err(Error::invalid("gradient shapes do not match parameters"));
        }
        let values = params.iter_mut().flat_map(|p| p.w.iter_mut().chain(p.b.iter_mut()));
        let grads = grads.iter().flat_map(|g| g.w.iter().chain(&g.b));
        match self {
            OptimizerState::Sgd { lr } => {
                for (p, g) in values.zip(grads) {
                    *p -= *lr * g;
                }
            }
            OptimizerState::Adam { lr, beta1, beta2, epsilon, m, v, t } => {
                *t += 1;
                let bc1 = 1.0 - beta1.powi(*t as i32);
                let bc2 = 1.0 - beta2.powi(*t as i32);
                for (((p, g), m), v) in values.zip(grads).zip(m.iter_mut()).zip(v.iter_mut()) {
                    *m = *beta1 * *m + (1.0 - *beta1) * g;
                    *v = *beta2 * *v + (1.0 - *beta2) * g * g;
                    let mhat = *m / bc1;
                    let vhat = *v / bc2;
                    *p -= *lr * mhat / (vhat.sqrt() + *epsilon);
                }
            }
        }
        Ok(())
    }

    pub fn step(&mut self, model: &mut Model, grads: &Grads) -> Result<()> {
        self.step_params(model.params_mut(), grads)
    }
}

pub fn sgd_step(params: &mut [LayerParams], grads: &Grads, state: &mut OptimizerState) -> Result<()> {
    state.step_params(params, grads)
}

pub fn adam_step(params: &mut [LayerParams], grads: &Grads, state: &mut OptimizerState) -> Result<()> {
    state.step_params(params, grads)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> Vec<LayerParams> {
        vec![LayerParams { w: vec![v], b: vec![], fan_in: 1, fan_out: 1 }]
    }

    #[test]
    fn sgd_scalar() {
        let mut p = scalar(0.0);
        let mut s = OptimizerState::new(OptimizerConfig::Sgd { lr: 0.1 }, 1);
        sgd_step(&mut p, &scalar(1.0), &mut s).unwrap();
        assert!((p[0].w[0] + 0.1).abs() < 1e-12);
    }

    #[test]
    fn adam_first_step() {
        let mut p = scalar(0.0);
        let mut s = OptimizerState::new(OptimizerConfig::adam(0.001), 1);
        adam_step(&mut p, &scalar(1.0), &mut s).unwrap();
        // m̂ = 1, v̂ = 1 → Δ = −lr/(1 + ε)
        assert!((p[0].w[0] + 0.001 / (1.0 + 1e-8)).abs() < 1e-12);
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        for cfg in [OptimizerConfig::Sgd { lr: 0.5 }, OptimizerConfig::adam(0.5)] {
            let mut p = scalar(1.25);
            let mut s = OptimizerState::new(cfg, 1);
            for _ in 0..3 {
                s.step_params(&mut p, &scalar(0.0)).unwrap();
            }
            assert_eq!(p[0].w[0], 1.25);
        }
    }
}
