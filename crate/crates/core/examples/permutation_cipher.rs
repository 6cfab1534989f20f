//! Encrypts a gradient image with each key generator for 1 and 16 rounds
//! and decrypts it again.
//!
//!     cargo run --example permutation_cipher

use permattack::eval::dissimilarity;
use permattack::permkit::{decrypt_rounds, encrypt_rounds, Dims, GrayImage, PatternKind, PatternSpec};

fn main() -> permattack::Result<()> {
    let dims = Dims::new(28, 28)?;
    let pixels = (0..dims.cells()).map(|i| ((i / dims.cols + i % dims.cols) * 4) as u8).collect();
    let img = GrayImage::new(dims, pixels)?;
    for kind in PatternKind::ALL {
        let spec = PatternSpec::preset(kind);
        for rounds in [1, 16] {
            let (cipher, keys) = encrypt_rounds(std::slice::from_ref(&img), &spec, rounds)?;
            let back = decrypt_rounds(&cipher, &keys)?;
            let d = dissimilarity(&img, &cipher[0])?;
            println!(
                "{kind:?} x{rounds:<2}: {} of {} pixels moved value, round trip {}",
                d.mismatches,
                d.cells,
                if back[0] == img { "exact" } else { "BROKEN" }
            );
        }
    }
    Ok(())
}
