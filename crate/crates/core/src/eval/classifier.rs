//! The small dense classifier used to score decrypted images.

use serde::{Deserialize, Serialize};

use crate::attacks::images_to_tensor;
use crate::ndl::{
    argmax, fit, Activation, EpochRecord, FitConfig, Init, LabelSource, LayerSpec, LossKind, Model, ModelSpec,
    OptimizerConfig, OutputHead, Tensor,
};
use crate::permkit::{Dims, GrayImage};
use crate::rng::{mix, SplitMix64};
use crate::{Error, Result};

pub const CLASSES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            lr: 0.001,
            batch_size: 128,
            epochs: 10,
            seed: 0,
        }
    }
}

/// Flatten → Dense 128 relu → Dense 10 logits. Softmax lives in the loss.
pub fn classifier_spec(dims: Dims) -> ModelSpec {
    ModelSpec {
        input_shape: vec![dims.rows, dims.cols, 1],
        layers: vec![
            LayerSpec::Flatten,
            LayerSpec::dense(128, Activation::Relu),
            LayerSpec::dense(CLASSES, Activation::Linear),
        ],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierReport {
    pub history: Vec<EpochRecord>,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

/// Per-class and overall accuracy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassAccuracy {
    pub counts: Vec<usize>,
    pub correct: Vec<usize>,
    pub overall: f64,
}

impl ClassAccuracy {
    /// `None` for classes without samples.
    pub fn per_class(&self) -> Vec<Option<f64>> {
        self.counts
            .iter()
            .zip(&self.correct)
            .map(|(&n, &c)| (n > 0).then(|| c as f64 / n as f64))
            .collect()
    }
}

fn label_source(images: &[GrayImage], labels: &[u8]) -> Result<LabelSource> {
    if images.len() != labels.len() {
        return Err(Error::invalid(format!("{} images but {} labels", images.len(), labels.len())));
    }
    if let Some(&l) = labels.iter().find(|&&l| l as usize >= CLASSES) {
        return Err(Error::invalid(format!("label {l} outside 0..{CLASSES}")));
    }
    let refs: Vec<&GrayImage> = images.iter().collect();
    Ok(LabelSource {
        x: images_to_tensor(&refs)?,
        labels: labels.iter().map(|&l| l as usize).collect(),
    })
}

pub fn train_measurement_classifier(
    train_images: &[GrayImage],
    train_labels: &[u8],
    test_images: &[GrayImage],
    test_labels: &[u8],
    cfg: &ClassifierConfig,
) -> Result<(Model, ClassifierReport)> {
    let dims = train_images.first().ok_or_else(|| Error::invalid("no training images"))?.dims();
    let train = label_source(train_images, train_labels)?;
    let test = label_source(test_images, test_labels)?;
    let mut model = Model::new(classifier_spec(dims))?;
    model.init(Init::XavierNormalized, mix(cfg.seed, u64::MAX));
    let fit_cfg = FitConfig {
        epochs: cfg.epochs,
        batch_size: cfg.batch_size,
        optimizer: OptimizerConfig::adam(cfg.lr),
        loss: LossKind::SparseCce,
        head: OutputHead::Identity,
        lr_decay: None,
        seed: cfg.seed,
    };
    // no validation split: the final-epoch model is kept
    let (report, _) = fit(&mut model, &fit_cfg, &train, None)?;
    let train_accuracy = classify_tensor(&model, &train.x, &train.labels)?.overall;
    let test_accuracy = classify_tensor(&model, &test.x, &test.labels)?.overall;
    Ok((
        model,
        ClassifierReport {
            history: report.history,
            train_accuracy,
            test_accuracy,
        },
    ))
}

fn classify_tensor(model: &Model, x: &Tensor, labels: &[usize]) -> Result<ClassAccuracy> {
    let mut counts = vec![0; CLASSES];
    let mut correct = vec![0; CLASSES];
    let n = labels.len();
    let idx: Vec<usize> = (0..n).collect();
    for chunk in idx.chunks(1024) {
        let y = model.predict(&x.gather_rows(chunk))?;
        let w = y.last_dim();
        for (row, &i) in y.data().chunks(w).zip(chunk) {
            counts[labels[i]] += 1;
            correct[labels[i]] += (argmax(row) == labels[i]) as usize;
        }
    }
    Ok(ClassAccuracy {
        overall: correct.iter().sum::<usize>() as f64 / n.max(1) as f64,
        counts,
        correct,
    })
}

/// Runs `images` (for instance decryptor outputs) through the classifier.
pub fn classify_predictions(model: &Model, images: &[GrayImage], labels: &[u8]) -> Result<ClassAccuracy> {
    let src = label_source(images, labels)?;
    classify_tensor(model, &src.x, &src.labels)
}

/// Uniformly random images.
pub fn noise_images(n: usize, dims: Dims, seed: u64) -> Vec<GrayImage> {
    (0..n)
        .map(|i| {
            let mut rng = SplitMix64::stream(seed, i as u64);
            GrayImage::new(dims, (0..dims.cells()).map(|_| rng.next_u32() as u8).collect()).expect("sized")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    // class c lights up row c of a 10×10 image
    fn toy(n: usize, seed: u64) -> (Vec<GrayImage>, Vec<u8>) {
        let dims = Dims::new(10, 10).unwrap();
        let mut rng = SplitMix64::new(seed);
        (0..n)
            .map(|_| {
                let c = rng.below(10) as usize;
                let mut px: Vec<u8> = (0..100).map(|_| rng.below(40) as u8).collect();
                for v in &mut px[c * 10..c * 10 + 10] {
                    *v = 200 + rng.below(50) as u8;
                }
                (GrayImage::new(dims, px).unwrap(), c as u8)
            })
            .unzip()
    }

    #[test]
    fn separable_toy_is_learned() {
        let (tr, trl) = toy(400, 1);
        let (te, tel) = toy(200, 2);
        let cfg = ClassifierConfig {
            epochs: 5,
            batch_size: 32,
            ..Default::default()
        };
        let (model, rep) = train_measurement_classifier(&tr, &trl, &te, &tel, &cfg).unwrap();
        assert!(rep.test_accuracy > 0.95, "{rep:?}");
        let table = classify_predictions(&model, &te, &tel).unwrap();
        assert_eq!(table.overall, rep.test_accuracy);
        assert_eq!(table.counts.iter().sum::<usize>(), 200);
        assert!(table.per_class().iter().flatten().all(|&a| (0.0..=1.0).contains(&a)));
    }

    #[test]
    fn label_checks() {
        let (tr, mut trl) = toy(4, 1);
        trl[0] = 10;
        let m = Model::new(classifier_spec(Dims::new(10, 10).unwrap())).unwrap();
        assert!(classify_predictions(&m, &tr, &trl).is_err());
        assert!(classify_predictions(&m, &tr, &trl[..3]).is_err());
    }
}
