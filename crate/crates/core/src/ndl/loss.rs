use serde::{Deserialize, Serialize};

use super::layers::softmax;
use super::tensor::Tensor;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Mse,
    /// Softmax plus cross-entropy against integer class labels.
    SparseCce,
}

fn same_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::invalid(format!(
            "prediction has {} values, target has {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

pub fn loss_mse(pred: &[f64], target: &[f64]) -> Result<f64> {
    same_len(pred, target)?;
    Ok(pred.iter().zip(target).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / pred.len() as f64)
}

/// `∂mse/∂ŷ = 2(ŷ − y)/n`.
pub fn loss_mse_grad(pred: &[f64], target: &[f64]) -> Result<Vec<f64>> {
    same_len(pred, target)?;
    let n = pred.len() as f64;
    Ok(pred.iter().zip(target).map(|(p, t)| 2.0 * (p - t) / n).collect())
}

fn check_labels(logits: &Tensor, labels: &[usize]) -> Result<usize> {
    let width = logits.last_dim();
    if logits.len() / width != labels.len() {
        return Err(Error::invalid(format!(
            "{} logit rows for {} labels",
            logits.len() / width,
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&c| c >= width) {
        return Err(Error::invalid(format!("class index {bad} out of range for {width} logits")));
    }
    Ok(width)
}

/// Mean of `−log softmax(logits)[class]` over rows.
pub fn loss_sparse_cce(logits: &Tensor, labels: &[usize]) -> Result<f64> {
    let width = check_labels(logits, labels)?;
    let total: f64 = logits
        .data()
        .chunks(width)
        .zip(labels)
        .map(|(row, &c)| {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            lse - row[c]
        })
        .sum();
    Ok(total / labels.len() as f64)
}

/// `(softmax − onehot)/rows`.
pub fn loss_sparse_cce_grad(logits: &Tensor, labels: &[usize]) -> Result<Vec<f64>> {
    let width = check_labels(logits, labels)?;
    let n = labels.len() as f64;
    let mut g = Vec::with_capacity(logits.len());
    for (row, &c) in logits.data().chunks(width).zip(labels) {
        let mut s = softmax(row);
        s[c] -= 1.0;
        g.extend(s.into_iter().map(|v| v / n));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_examples() {
        assert_eq!(loss_mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(loss_mse(&[1.0, 1.0], &[0.0, 0.0]).unwrap(), 1.0);
        let a = loss_mse(&[0.5, -1.0, 2.0], &[0.0; 3]).unwrap();
        let b = loss_mse(&[1.0, -2.0, 4.0], &[0.0; 3]).unwrap();
        assert!((b - 4.0 * a).abs() < 1e-12);
        assert!(loss_mse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn cce_examples() {
        let uniform = Tensor::zeros(&[1, 10]);
        assert!((loss_sparse_cce(&uniform, &[3]).unwrap() - 10f64.ln()).abs() < 1e-12);
        let mut dom = vec![0.0; 10];
        dom[2] = 100.0;
        let dom = Tensor::new(vec![1, 10], dom).unwrap();
        assert!(loss_sparse_cce(&dom, &[2]).unwrap() < 1e-40);
        assert!(loss_sparse_cce(&uniform, &[10]).is_err());
        let g = loss_sparse_cce_grad(&uniform, &[0]).unwrap();
        assert!((g.iter().sum::<f64>()).abs() < 1e-15);
    }
}
