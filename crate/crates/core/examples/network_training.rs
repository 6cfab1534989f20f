//! Fits a two-layer network to a noisy linear map, checks its gradients and
//! reloads it from a checkpoint.
//!
//!     cargo run --example network_training

use permattack::ndl::{
    checkpoint_bytes, evaluate, fit, gradient_check, parse_checkpoint, Activation, FitConfig, GradCheckConfig, Init,
    LayerSpec, LossKind, Model, ModelSpec, OptimizerConfig, OutputHead, Tensor, TensorSource,
};
use permattack::rng::SplitMix64;

fn main() -> permattack::Result<()> {
    let mut rng = SplitMix64::new(1);
    let n = 512;
    let x: Vec<f64> = (0..n * 4).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let y: Vec<f64> = x
        .chunks(4)
        .flat_map(|r| [r[0] - 2.0 * r[1] + 0.5 * r[3], r[2] + r[3]])
        .map(|v| v + 0.01 * rng.uniform(-1.0, 1.0))
        .collect();
    let data = TensorSource { x: Tensor::new(vec![n, 4], x)?, y: Tensor::new(vec![n, 2], y)? };

    let spec = ModelSpec {
        input_shape: vec![4],
        layers: vec![LayerSpec::dense(16, Activation::Relu), LayerSpec::dense(2, Activation::Linear)],
    };
    let mut model = Model::new(spec)?;
    model.init(Init::XavierUniform, 7);
    let check = gradient_check(&model, LossKind::Mse, GradCheckConfig::default(), 3)?;
    println!("gradient check: max rel error {:.2e} over {} probes", check.max_rel_error, check.probes);

    let cfg = FitConfig {
        epochs: 60,
        batch_size: 32,
        optimizer: OptimizerConfig::adam(0.01),
        loss: LossKind::Mse,
        head: OutputHead::Identity,
        lr_decay: None,
        seed: 5,
    };
    let (report, opt) = fit(&mut model, &cfg, &data, None)?;
    let last = report.history.last().expect("at least one epoch");
    println!("epoch {}: train loss {:.5}", last.epoch, last.train_loss);

    let (reloaded, _) = parse_checkpoint(&checkpoint_bytes(&model, Some(&opt)))?;
    let m = evaluate(&reloaded, &data, LossKind::Mse, OutputHead::Identity, 128)?;
    println!("reloaded: r2 {:.4}, mse {:.5}", m.r2, m.mse);
    Ok(())
}
