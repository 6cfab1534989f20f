//! Central-difference gradient checks.

use super::layers::Activation;
use super::loss::{loss_mse, loss_mse_grad, loss_sparse_cce, loss_sparse_cce_grad, LossKind};
use super::model::{Grads, Mode, Model};
use super::tensor::Tensor;
use crate::rng::SplitMix64;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub enum Target {
    Values(Tensor),
    Classes(Vec<usize>),
}

/// Loss value and its gradient w.r.t. the model output.
pub fn loss_and_grad(output: &Tensor, loss: LossKind, target: &Target) -> Result<(f64, Tensor)> {
    match (loss, target) {
        (LossKind::Mse, Target::Values(t)) => Ok((
            loss_mse(output.data(), t.data())?,
            Tensor::new(output.shape().to_vec(), loss_mse_grad(output.data(), t.data())?)?,
        )),
        (LossKind::SparseCce, Target::Classes(c)) => Ok((
            loss_sparse_cce(output, c)?,
            Tensor::new(output.shape().to_vec(), loss_sparse_cce_grad(output, c)?)?,
        )),
        _ => Err(Error::invalid("loss kind does not match target kind")),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GradCheckConfig {
    pub tolerance: f64,
    pub step: f64,
    /// Gradients smaller than this are compared on absolute error scaled by it.
    pub floor: f64,
    pub batch: usize,
    /// Relu pre-activations closer than this to 0 trigger an input resample.
    pub kink_margin: f64,
    /// At most this many parameters are probed (a seeded subset beyond it).
    pub max_probes: usize,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            tolerance: 1e-4,
            step: 1e-5,
            floor: 1e-4,
            batch: 3,
            kink_margin: 1e-3,
            max_probes: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub probes: usize,
    pub resamples: usize,
    pub passed: bool,
}

pub fn gradient_check(model: &Model, loss: LossKind, cfg: GradCheckConfig, seed: u64) -> Result<GradCheckReport> {
    gradient_check_with(model, loss, cfg, seed, |_| {})
}

/// Like [`gradient_check`], but `tamper` may alter the analytic gradients
/// before comparison.
pub fn gradient_check_with(
    model: &Model,
    loss: LossKind,
    cfg: GradCheckConfig,
    seed: u64,
    tamper: impl Fn(&mut Grads),
) -> Result<GradCheckReport> {
    let mut rng = SplitMix64::new(seed);
    let mut shape = vec![cfg.batch];
    shape.extend_from_slice(model.input_shape());
    let n_in: usize = shape.iter().product();
    let out_len: usize = cfg.batch * model.output_shape().iter().product::<usize>();
    let target = match loss {
        LossKind::Mse => Target::Values(Tensor::new(
            {
                let mut s = vec![cfg.batch];
                s.extend_from_slice(model.output_shape());
                s
            },
            (0..out_len).map(|_| rng.uniform(-1.0, 1.0)).collect(),
        )?),
        LossKind::SparseCce => {
            let width = *model.output_shape().last().unwrap();
            let rows = out_len / width;
            Target::Classes((0..rows).map(|_| rng.below(width as u64) as usize).collect())
        }
    };
    let fwd_seed = rng.next_u64();
    let mut resamples = 0;
    let (x, cache) = loop {
        let x = Tensor::new(shape.clone(), (0..n_in).map(|_| rng.uniform(-1.0, 1.0)).collect())?;
        let (_, cache) = model.forward(&x, Mode::Train, fwd_seed)?;
        let near_kink = cache
            .preactivations()
            .filter(|(a, _)| *a == Activation::Relu)
            .any(|(_, z)| z.iter().any(|v| v.abs() < cfg.kink_margin));
        if !near_kink {
            break (x, cache);
        }
        resamples += 1;
        if resamples > 1000 {
            return Err(Error::invalid("could not draw an input away from relu kinks"));
        }
    };
    let (_, g_out) = loss_and_grad(cache.output(), loss, &target)?;
    let mut analytic = model.backward(&cache, &g_out)?;
    tamper(&mut analytic);

    let mut probes: Vec<(usize, bool, usize)> = Vec::new();
    for (l, p) in model.params().iter().enumerate() {
        probes.extend((0..p.w.len()).map(|i| (l, true, i)));
        probes.extend((0..p.b.len()).map(|i| (l, false, i)));
    }
    if probes.len() > cfg.max_probes {
        rng.shuffle(&mut probes);
        probes.truncate(cfg.max_probes);
    }
    let mut work = model.clone();
    let eval = |m: &Model| -> Result<f64> {
        let (y, _) = m.forward(&x, Mode::Train, fwd_seed)?;
        Ok(loss_and_grad(&y, loss, &target)?.0)
    };
    let mut max_rel: f64 = 0.0;
    for &(l, is_w, i) in &probes {
        let orig = {
            let p = &work.params()[l];
            if is_w { p.w[i] } else { p.b[i] }
        };
        let set = |m: &mut Model, v: f64| {
            let p = &mut m.params_mut()[l];
            if is_w { p.w[i] = v } else { p.b[i] = v }
        };
        set(&mut work, orig + cfg.step);
        let up = eval(&work)?;
        set(&mut work, orig - cfg.step);
        let down = eval(&work)?;
        set(&mut work, orig);
        let numeric = (up - down) / (2.0 * cfg.step);
        let a = if is_w { analytic[l].w[i] } else { analytic[l].b[i] };
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(cfg.floor);
        max_rel = max_rel.max(rel);
    }
    Ok(GradCheckReport {
        max_rel_error: max_rel,
        probes: probes.len(),
        resamples,
        passed: max_rel < cfg.tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ndl::{Init, LayerSpec, ModelSpec};
    use Activation::*;

    fn model(input: &[usize], layers: Vec<LayerSpec>, seed: u64) -> Model {
        let mut m = Model::new(ModelSpec { input_shape: input.to_vec(), layers }).unwrap();
        m.init(Init::XavierUniform, seed);
        for p in m.params_mut() {
            p.b.iter_mut().enumerate().for_each(|(i, b)| *b = 0.05 * (i % 3) as f64);
        }
        m
    }

    #[test]
    fn linear_model_at_1e_8() {
        let m = model(&[4], vec![LayerSpec::dense(5, Linear), LayerSpec::dense(3, Linear)], 1);
        let cfg = GradCheckConfig { tolerance: 1e-8, step: 1e-3, ..Default::default() };
        let r = gradient_check(&m, LossKind::Mse, cfg, 2).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn relu_model_resamples_near_kinks() {
        let m = model(&[6], vec![LayerSpec::dense(8, Relu), LayerSpec::dense(2, Linear)], 3);
        let cfg = GradCheckConfig { kink_margin: 0.02, batch: 4, ..Default::default() };
        let mut resampled = 0;
        for seed in 0..10 {
            let r = gradient_check(&m, LossKind::Mse, cfg, seed).unwrap();
            assert!(r.passed, "{r:?}");
            resampled += r.resamples;
        }
        assert!(resampled > 0);
        // a unit pinned at the kink can never be resampled away
        let mut pinned = m.clone();
        pinned.params_mut()[0].w[..6 * 8].iter_mut().skip(2).step_by(8).for_each(|w| *w = 0.0);
        pinned.params_mut()[0].b[2] = 0.0;
        assert!(gradient_check(&pinned, LossKind::Mse, cfg, 0).is_err());
    }

    #[test]
    fn wrong_derivative_fails() {
        let m = model(&[3], vec![LayerSpec::dense(3, Sigmoid), LayerSpec::dense(2, Linear)], 5);
        let r = gradient_check_with(&m, LossKind::Mse, Default::default(), 6, |g| g[0].w[1] *= 1.5).unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn classifier_cce() {
        let m = model(&[2, 3], vec![LayerSpec::Flatten, LayerSpec::dense(7, Sigmoid), LayerSpec::dense(4, Linear)], 7);
        let r = gradient_check(&m, LossKind::SparseCce, Default::default(), 8).unwrap();
        assert!(r.passed, "{r:?}");
    }
}
