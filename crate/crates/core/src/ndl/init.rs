use crate::rng::SplitMix64;

pub fn xavier_uniform_bound(fan_in: usize) -> f64 {
    (1.0 / fan_in.max(1) as f64).sqrt()
}

pub fn xavier_normalized_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out).max(1) as f64).sqrt()
}

/// `count` draws from `U(±√(1/fan_in))`.
pub fn init_xavier_uniform(fan_in: usize, count: usize, rng: &mut SplitMix64) -> Vec<f64> {
    let b = xavier_uniform_bound(fan_in);
    (0..count).map(|_| rng.uniform(-b, b)).collect()
}

/// `count` draws from `U(±√(6/(fan_in + fan_out)))`.
pub fn init_xavier_normalized(fan_in: usize, fan_out: usize, count: usize, rng: &mut SplitMix64) -> Vec<f64> {
    let b = xavier_normalized_bound(fan_in, fan_out);
    (0..count).map(|_| rng.uniform(-b, b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds() {
        assert_eq!(xavier_uniform_bound(1), 1.0);
        assert!((xavier_uniform_bound(784) - 1.0 / 28.0).abs() < 1e-15);
        let mut rng = SplitMix64::new(0);
        let w = init_xavier_uniform(784, 100_000, &mut rng);
        let max = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max <= 1.0 / 28.0 && max > 0.99 / 28.0);
        let w = init_xavier_normalized(64, 16, 10_000, &mut rng);
        assert!(w.iter().all(|v| v.abs() <= (6.0f64 / 80.0).sqrt()));
    }
}
