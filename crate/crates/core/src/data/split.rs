use crate::rng::SplitMix64;
use crate::{Error, Result};

/// Shuffles `samples` with `seed` and cuts them into consecutive splits.
/// Each split gets `floor(fraction·n)` items; the remainder goes to the last.
pub fn shuffle_split<T: Clone>(samples: &[T], seed: u64, fractions: &[f64]) -> Result<Vec<Vec<T>>> {
    if fractions.is_empty() || fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
        return Err(Error::invalid(format!("bad split fractions {fractions:?}")));
    }
    let total: f64 = fractions.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("split fractions sum to {total}, not 1")));
    }
    let n = samples.len();
    let order = SplitMix64::new(seed).permutation(n);
    let mut splits = Vec::with_capacity(fractions.len());
    let mut start = 0;
    for (i, f) in fractions.iter().enumerate() {
        let end = if i + 1 == fractions.len() {
            n
        } else {
            (start + (f * n as f64).floor() as usize).min(n)
        };
        splits.push(order[start..end].iter().map(|&j| samples[j as usize].clone()).collect());
        start = end;
    }
    Ok(splits)
}
