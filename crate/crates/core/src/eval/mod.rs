//! Attack-quality measurements: pixel dissimilarity, intensity histograms and
//! a measurement classifier that scores decrypted images.

mod classifier;
mod dissim;
mod report;

pub use classifier::{
    classifier_spec, classify_predictions, noise_images, train_measurement_classifier, ClassAccuracy,
    ClassifierConfig, ClassifierReport, CLASSES,
};
pub use dissim::{corpus_histogram, dissimilarity, intensity_histogram, uniform_match_rate, DissimilarityReport};
pub use report::{EvalReport, EvalRow};
