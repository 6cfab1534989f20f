//! A small differentiable-computation core: tensors, five layer kinds,
//! losses, metrics, SGD/Adam, gradient checks and checkpoints.
//!
//! Runs of linear pointwise convolutions are collapsed to one per-pixel
//! affine map for both the forward and the backward pass; the gradients are
//! the exact chain-rule gradients of the individual layers.

mod checkpoint;
mod gradcheck;
mod init;
mod layers;
mod loss;
mod metrics;
mod model;
mod optim;
mod tensor;
mod train;

pub use checkpoint::{checkpoint_bytes, load_checkpoint, parse_checkpoint, save_checkpoint, NDL_MAGIC, NDL_VERSION};
pub use gradcheck::{gradient_check, gradient_check_with, loss_and_grad, GradCheckConfig, GradCheckReport, Target};
pub use init::{init_xavier_normalized, init_xavier_uniform, xavier_normalized_bound, xavier_uniform_bound};
pub use layers::{sigmoid, softmax, Activation, LayerSpec};
pub use loss::{loss_mse, loss_mse_grad, loss_sparse_cce, loss_sparse_cce_grad, LossKind};
pub use metrics::{metric_r2, metric_suite, residuals, Metrics};
pub use model::{Cache, Grads, Init, LayerParams, Mode, Model, ModelSpec};
pub use optim::{adam_step, sgd_step, OptimizerConfig, OptimizerState};
pub use tensor::Tensor;
pub use train::{argmax, evaluate, fit, BatchSource, EpochRecord, FitConfig, LabelSource, OutputHead, TensorSource, TrainReport};
