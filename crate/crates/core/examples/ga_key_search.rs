//! Recovers a 4x4 permutation key with the genetic search and a perfect
//! region oracle, then reports the remaining search space.
//!
//!     cargo run --release --example ga_key_search

use permattack::gakey::{run_ga, search_space_reduction, GaConfig, SyntheticOracle};
use permattack::permkit::{apply_pbox, Dims, GrayImage, PBox};
use permattack::rng::SplitMix64;

fn main() -> permattack::Result<()> {
    let dims = Dims::new(4, 4)?;
    let mut rng = SplitMix64::new(9);
    let template = GrayImage::new(dims, (0..16).map(|i| (i * 16) as u8).collect())?;
    let key = PBox::new(dims, rng.permutation(16))?;
    let cipher = apply_pbox(&template, &key)?;

    let cfg = GaConfig { seed: 3, max_generations: 500, ..Default::default() };
    let out = run_ga(&cipher, &SyntheticOracle::perfect(template), &cfg)?;
    for g in out.log.iter().step_by(10) {
        println!("generation {:>3}: best fitness {:.3}", g.generation, g.best_fitness);
    }
    println!("converged: {}, key recovered: {}", out.converged, out.best.to_pbox() == key.inverse());

    let space = search_space_reduction(Dims::new(28, 28)?, &[(1, 100), (2, 96)])?;
    println!("28x28 with 196 fixed cells leaves 10^{:.1} keys", space.log10);
    Ok(())
}
