//! Dissimilarity, intensity histograms and the noise baseline of a freshly
//! trained measurement classifier on synthetic digits.
//!
//!     cargo run --release --example evaluation

use permattack::eval::{
    classify_predictions, dissimilarity, intensity_histogram, noise_images, train_measurement_classifier,
    uniform_match_rate, ClassifierConfig,
};
use permattack::permkit::{apply_pbox, Dims, GrayImage, PBox};
use permattack::rng::SplitMix64;

/// Class `k` lights up row band `k` with jitter.
fn bands(n: usize, seed: u64) -> (Vec<GrayImage>, Vec<u8>) {
    let dims = Dims::new(28, 28).unwrap();
    let mut rng = SplitMix64::new(seed);
    let mut imgs = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let k = (i % 10) as u8;
        let mut img = GrayImage::zeros(dims);
        let row = 2 + 2 * k as usize + rng.below(2) as usize;
        for c in 4..24 {
            img.pixels_mut()[row * 28 + c] = 150 + rng.below(100) as u8;
        }
        imgs.push(img);
        labels.push(k);
    }
    (imgs, labels)
}

fn main() -> permattack::Result<()> {
    let (train, train_lbl) = bands(2000, 1);
    let (test, test_lbl) = bands(500, 2);
    let cfg = ClassifierConfig { epochs: 3, seed: 1, ..Default::default() };
    let (clf, rep) = train_measurement_classifier(&train, &train_lbl, &test, &test_lbl, &cfg)?;
    println!("classifier test accuracy {:.3}", rep.test_accuracy);
    let noise = noise_images(500, Dims::new(28, 28)?, 3);
    println!("noise accuracy {:.3}", classify_predictions(&clf, &noise, &test_lbl)?.overall);

    let p = PBox::new(test[0].dims(), SplitMix64::new(4).permutation(784))?;
    let d = dissimilarity(&test[0], &test[1])?;
    let dp = dissimilarity(&apply_pbox(&test[0], &p)?, &apply_pbox(&test[1], &p)?)?;
    println!("dissimilarity {} before and {} after a shared permutation", d.mismatches, dp.mismatches);
    let (rate, sigma) = uniform_match_rate(784, 5);
    println!("uniform images agree on {:.4} +- {:.4} of positions", rate, sigma);
    println!("black pixels in the first test image: {}", intensity_histogram(&test[0])[0]);
    Ok(())
}
