use serde::{Deserialize, Serialize};

use super::loss::loss_mse;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub loss: f64,
    pub mse: f64,
    pub r2: f64,
    pub mae: f64,
    /// Percent; targets equal to 0 are skipped.
    pub mape: f64,
    pub rmse: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
}

/// `1 − SSR/SST`. A constant target gives 1 for a perfect fit and 0
/// otherwise.
pub fn metric_r2(pred: &[f64], target: &[f64]) -> Result<f64> {
    let mse = loss_mse(pred, target)?;
    let n = target.len() as f64;
    let mean = target.iter().sum::<f64>() / n;
    let sst: f64 = target.iter().map(|t| (t - mean) * (t - mean)).sum();
    let ssr = mse * n;
    if sst == 0.0 {
        return Ok(if ssr == 0.0 { 1.0 } else { 0.0 });
    }
    Ok(1.0 - ssr / sst)
}

/// `yᵢ − ŷᵢ`.
pub fn residuals(pred: &[f64], target: &[f64]) -> Vec<f64> {
    target.iter().zip(pred).map(|(t, p)| t - p).collect()
}

/// Regression metrics; `loss` is set to the MSE.
pub fn metric_suite(pred: &[f64], target: &[f64]) -> Result<Metrics> {
    let mse = loss_mse(pred, target)?;
    let n = pred.len() as f64;
    let mae = residuals(pred, target).iter().map(|r| r.abs()).sum::<f64>() / n;
    let (sum, cnt) = pred
        .iter()
        .zip(target)
        .filter(|(_, &t)| t != 0.0)
        .fold((0.0, 0usize), |(s, c), (p, t)| (s + ((t - p) / t).abs(), c + 1));
    Ok(Metrics {
        loss: mse,
        mse,
        r2: metric_r2(pred, target)?,
        mae,
        mape: if cnt == 0 { 0.0 } else { 100.0 * sum / cnt as f64 },
        rmse: mse.sqrt(),
        accuracy: None,
    })
}
