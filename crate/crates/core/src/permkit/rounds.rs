//! Multi-round permutation encryption with chained round keys.

use rayon::prelude::*;

use super::{apply_pbox, gen_pbox, Dims, GeneratorState, GrayImage, PBox, PatternSpec};
use crate::{Error, Result};

/// Round keys `K_1 … K_rounds`, each generated from the state left by the
/// previous one.
pub fn generate_schedule(spec: &PatternSpec, dims: Dims, rounds: usize) -> Result<Vec<PBox>> {
    if rounds == 0 {
        return Err(Error::invalid("rounds must be at least 1"));
    }
    let mut state = GeneratorState::Fresh;
    let mut keys = Vec::with_capacity(rounds);
    for r in 0..rounds {
        let (key, next) = gen_pbox(spec, dims, &state)?;
        if key.len() > 1 && key.is_identity() {
            return Err(Error::DegenerateOrbit(format!(
                "round {} key is the identity permutation",
                r + 1
            )));
        }
        keys.push(key);
        state = next;
    }
    Ok(keys)
}

/// Encrypts every image with `rounds` chained keys. Returns the ciphertexts
/// and the key schedule in application order.
pub fn encrypt_rounds(
    images: &[GrayImage],
    spec: &PatternSpec,
    rounds: usize,
) -> Result<(Vec<GrayImage>, Vec<PBox>)> {
    let first = images
        .first()
        .ok_or_else(|| Error::invalid("no images to encrypt"))?;
    let dims = first.dims();
    if let Some(bad) = images.iter().find(|im| im.dims() != dims) {
        return Err(Error::dims(dims, bad.dims()));
    }
    let keys = generate_schedule(spec, dims, rounds)?;
    let mut current = images.to_vec();
    for key in &keys {
        current = current
            .par_iter()
            .map(|im| apply_pbox(im, key))
            .collect::<Result<_>>()?;
    }
    Ok((current, keys))
}

/// Undoes [`encrypt_rounds`]: applies the inverse keys last-to-first.
pub fn decrypt_rounds(images: &[GrayImage], keys: &[PBox]) -> Result<Vec<GrayImage>> {
    let Some(first_key) = keys.first() else {
        return Err(Error::invalid("empty key schedule"));
    };
    let dims = first_key.dims();
    if let Some(k) = keys.iter().find(|k| k.dims() != dims) {
        return Err(Error::dims(dims, k.dims()));
    }
    if let Some(im) = images.iter().find(|im| im.dims() != dims) {
        return Err(Error::dims(dims, im.dims()));
    }
    let inverse = keys
        .iter()
        .rev()
        .map(PBox::inverse)
        .try_fold(PBox::identity(dims), |acc, k| acc.then(&k))?;
    images.par_iter().map(|im| apply_pbox(im, &inverse)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permkit::PatternKind;
    use crate::rng::SplitMix64;

    fn random_images(dims: Dims, count: usize, seed: u64) -> Vec<GrayImage> {
        let mut rng = SplitMix64::new(seed);
        (0..count)
            .map(|_| {
                let px = (0..dims.cells()).map(|_| rng.below(256) as u8).collect();
                GrayImage::new(dims, px).unwrap()
            })
            .collect()
    }

    #[test]
    fn single_round_is_apply_pbox() {
        let dims = Dims::new(28, 28).unwrap();
        let imgs = random_images(dims, 3, 1);
        let spec = PatternSpec::preset(PatternKind::Cml);
        let (ct, keys) = encrypt_rounds(&imgs, &spec, 1).unwrap();
        assert_eq!(keys.len(), 1);
        for (c, p) in ct.iter().zip(&imgs) {
            assert_eq!(c, &apply_pbox(p, &keys[0]).unwrap());
        }
    }

    #[test]
    fn two_rounds_equal_composed_key_on_4x4() {
        let dims = Dims::new(4, 4).unwrap();
        // distinct pixels so positions are fully observable
        let img = GrayImage::new(dims, (0..16).collect()).unwrap();
        for kind in PatternKind::ALL {
            let spec = match kind {
                PatternKind::Gcbpm => PatternSpec::Gcbpm { beta1: 0, beta2: 1, delta1: 3, delta2: 9 },
                k => PatternSpec::preset(k),
            };
            let (ct, keys) = encrypt_rounds(std::slice::from_ref(&img), &spec, 2).unwrap();
            // brute force: follow each pixel through K1 then K2
            let mut expect = [0u8; 16];
            for i in 0..16 {
                let mid = keys[0].table()[i] as usize;
                expect[keys[1].table()[mid] as usize] = i as u8;
            }
            assert_eq!(ct[0].pixels(), &expect, "{kind:?}");
        }
    }

    #[test]
    fn round_trip_for_1_8_16() {
        let dims = Dims::new(28, 28).unwrap();
        let imgs = random_images(dims, 4, 2);
        for kind in PatternKind::ALL {
            for rounds in [1, 8, 16] {
                let spec = PatternSpec::preset(kind);
                let (ct, keys) = encrypt_rounds(&imgs, &spec, rounds).unwrap();
                assert_eq!(keys.len(), rounds);
                assert_eq!(decrypt_rounds(&ct, &keys).unwrap(), imgs);
            }
        }
    }

    #[test]
    fn identity_key_decrypts_to_input() {
        let dims = Dims::new(3, 5).unwrap();
        let imgs = random_images(dims, 2, 3);
        assert_eq!(decrypt_rounds(&imgs, &[PBox::identity(dims)]).unwrap(), imgs);
    }

    #[test]
    fn reversed_order_without_inversion_fails() {
        let dims = Dims::new(2, 2).unwrap();
        let k = PBox::new(dims, vec![1, 2, 3, 0]).unwrap();
        let img = GrayImage::new(dims, vec![10, 20, 30, 40]).unwrap();
        let ct = apply_pbox(&img, &k).unwrap();
        assert_ne!(apply_pbox(&ct, &k).unwrap(), img);
        assert_eq!(decrypt_rounds(&[ct], &[k]).unwrap(), vec![img]);
    }

    #[test]
    fn errors() {
        let spec = PatternSpec::preset(PatternKind::Logistic);
        assert!(encrypt_rounds(&[], &spec, 1).is_err());
        let a = GrayImage::zeros(Dims::new(2, 2).unwrap());
        let b = GrayImage::zeros(Dims::new(2, 3).unwrap());
        assert!(encrypt_rounds(&[a.clone(), b.clone()], &spec, 1).is_err());
        assert!(encrypt_rounds(std::slice::from_ref(&a), &spec, 0).is_err());
        assert!(decrypt_rounds(&[b], &[PBox::identity(Dims::new(2, 2).unwrap())]).is_err());
        assert!(decrypt_rounds(&[a], &[]).is_err());
    }
}
