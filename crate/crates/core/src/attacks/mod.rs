//! Attack architectures, training with best-checkpoint retention, transfer
//! learning and prediction export.

mod arch;
mod predict;
mod sources;
mod train;

pub use arch::{
    build_decryptor, build_katan_model, build_simon_model, decryptor_subtotals, instantiate, DECRYPTOR_CONV_PARAMS,
    DECRYPTOR_DENSE_PARAMS, DECRYPTOR_PARAMS, KATAN_PARAMS, SIMON_KEEP, SIMON_PARAMS, SIMON_STATED_PARAMS,
};
pub use predict::{predict_bits, predict_images, to_pixel, triptych_grid};
pub use sources::{images_to_tensor, BitPairSource, ImagePairSource, LwcSource};
pub use train::{init_seed, train, transfer_train, AttackTask, OptimizerKind, TrainConfig, TrainOutcome};
