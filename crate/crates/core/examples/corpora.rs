//! Builds small seeded corpora and shows that the digests only depend on
//! the inputs.
//!
//!     cargo run --example corpora

use permattack::data::{build_katan_corpus, build_pbox_corpus, build_simon_corpus, IdxImages};
use permattack::permkit::{Dims, GrayImage, PatternKind, PatternSpec};
use permattack::rng::SplitMix64;

fn images(n: usize, seed: u64) -> permattack::Result<IdxImages> {
    let dims = Dims::new(28, 28)?;
    let mut rng = SplitMix64::new(seed);
    let imgs = (0..n)
        .map(|_| GrayImage::new(dims, (0..dims.cells()).map(|_| rng.next_u32() as u8).collect()))
        .collect::<permattack::Result<Vec<_>>>()?;
    IdxImages::new(dims, imgs)
}

fn main() -> permattack::Result<()> {
    let (train, test) = (images(100, 1)?, images(20, 2)?);
    let spec = PatternSpec::preset(PatternKind::Lorenz);
    let a = build_pbox_corpus(&train, &test, &spec, 4)?;
    let b = build_pbox_corpus(&train, &test, &spec, 4)?;
    println!("pbox   {} (rebuilt: {})", a.manifest.digest, a.manifest.digest == b.manifest.digest);

    let k = build_katan_corpus(1000, 100, 42)?;
    println!("katan  {} ({} train records)", k.manifest.digest, k.splits[0].len());
    let s = build_simon_corpus(1000, 100, 100, 42)?;
    println!("simon  {} ({} train records)", s.manifest.digest, s.splits[0].len());
    Ok(())
}
