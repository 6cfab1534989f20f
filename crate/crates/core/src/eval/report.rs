use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One line of the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub pattern: String,
    pub rounds: usize,
    pub loss: f64,
    pub r2: f64,
    pub mse: f64,
    pub classifier_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    /// Classifier accuracy on its own test images.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classifier_test_accuracy: Option<f64>,
    /// Classifier accuracy on uniformly random images.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_accuracy: Option<f64>,
    /// Per-class accuracy of the classifier on predicted images.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_class_accuracy: Option<Vec<Option<f64>>>,
    /// 256-bin intensity histograms keyed by a label such as "plain".
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub histograms: Vec<(String, Vec<u64>)>,
}

impl EvalReport {
    pub fn csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).map_err(|e| Error::invalid(e.to_string()))?;
        }
        w.into_inner().map_err(|e| Error::invalid(e.to_string()))
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.csv_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}
