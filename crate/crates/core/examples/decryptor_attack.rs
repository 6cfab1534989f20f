//! Known-plaintext attack on a one-round CML cipher. Uses the first MNIST
//! images when `data/mnist` is present and synthetic strokes otherwise.
//!
//!     cargo run --release --example decryptor_attack

use std::path::Path;

use permattack::attacks::{predict_images, train, AttackTask, ImagePairSource, OptimizerKind, TrainConfig};
use permattack::data::{build_pbox_corpus, read_idx, write_pgm, IdxImages};
use permattack::ndl::Init;
use permattack::permkit::{Dims, GrayImage, PatternKind, PatternSpec};
use permattack::rng::SplitMix64;

fn strokes(n: usize, seed: u64) -> permattack::Result<IdxImages> {
    let dims = Dims::new(28, 28)?;
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut img = GrayImage::zeros(dims);
        let (r, c0, len) = (4 + rng.below(20) as usize, 2 + rng.below(10) as usize, 6 + rng.below(12) as usize);
        for c in c0..(c0 + len).min(28) {
            img.pixels_mut()[r * 28 + c] = 255;
            img.pixels_mut()[(c % 28) * 28 + r] = 200;
        }
        out.push(img);
    }
    IdxImages::new(dims, out)
}

fn main() -> permattack::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist");
    let (train_plain, val_plain) = match (
        read_idx(&dir.join("train-images-idx3-ubyte.gz")),
        read_idx(&dir.join("t10k-images-idx3-ubyte.gz")),
    ) {
        (Ok(tr), Ok(te)) => (tr.take(1000), te.take(200)),
        _ => (strokes(1000, 1)?, strokes(200, 2)?),
    };
    let corpus = build_pbox_corpus(&train_plain, &val_plain, &PatternSpec::preset(PatternKind::Cml), 1)?;
    let tr = ImagePairSource::new(&corpus.train_cipher.images, &corpus.train_plain.images)?;
    let va = ImagePairSource::new(&corpus.test_cipher.images, &corpus.test_plain.images)?;
    let cfg = TrainConfig {
        lr: 0.001,
        batch_size: 100,
        epochs: 20,
        seed: 1,
        optimizer: OptimizerKind::Adam,
        init: Init::XavierUniform,
        checkpoint: None,
        lr_decay: None,
    };
    let out = train(AttackTask::Decryptor, &tr, Some(&va), &cfg)?;
    if let Some(m) = &out.report.best_val {
        println!("best epoch {}: val r2 {:.4}, mse {:.6}", out.report.best_epoch, m.r2, m.mse);
    }
    let pred = predict_images(&out.model, &corpus.test_cipher.images[..1])?;
    let path = std::env::temp_dir().join("decryptor_attack.pgm");
    write_pgm(&path, &pred[0])?;
    println!("first prediction written to {}", path.display());
    Ok(())
}
