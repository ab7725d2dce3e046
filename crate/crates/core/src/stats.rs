//! Small statistics helpers for Monte Carlo estimates.

use serde::{Deserialize, Serialize};

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation over sqrt(n); zero when `samples < 2`.
    pub stderr: f64,
    pub samples: u64,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Estimate { mean: f64::NAN, stderr: f64::NAN, samples: 0 };
        }
        let mean = pairwise_sum(xs) / n as f64;
        let stderr = if n > 1 {
            let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
            (pairwise_sum(&sq) / (n - 1) as f64).sqrt() / (n as f64).sqrt()
        } else {
            0.0
        };
        Estimate { mean, stderr, samples: n as u64 }
    }

    /// Estimate of a Bernoulli frequency.
    pub fn from_hits(hits: u64, n: u64) -> Self {
        if n == 0 {
            return Estimate { mean: f64::NAN, stderr: f64::NAN, samples: 0 };
        }
        let p = hits as f64 / n as f64;
        Estimate { mean: p, stderr: (p * (1.0 - p) / n as f64).sqrt(), samples: n }
    }

    /// `|mean - target| <= k * stderr`.
    pub fn within_sigmas(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr
    }

    pub fn relative_error(&self, target: f64) -> f64 {
        ((self.mean - target) / target).abs()
    }
}

/// Fixed-order pairwise (tree) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_stderr() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        // sample variance 5/3
        assert!((e.stderr - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_sample_has_zero_stderr() {
        let e = Estimate::from_samples(&[3.0]);
        assert_eq!((e.mean, e.stderr, e.samples), (3.0, 0.0, 1));
    }

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let xs: Vec<f64> = (0..10_000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 49_995_000.0);
    }
}
