use serde::Serialize;

use crate::error::{Error, Result};

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProportionEstimate {
    pub successes: u64,
    pub trials: u64,
}

impl ProportionEstimate {
    pub fn new(successes: u64, trials: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::EmptySample);
        }
        if successes > trials {
            return Err(Error::InvalidProportion { successes, trials });
        }
        Ok(ProportionEstimate { successes, trials })
    }

    pub fn point(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    /// Wald half-width `z * sqrt(p (1 - p) / n)`.
    pub fn halfwidth(&self, z: f64) -> f64 {
        let p = self.point();
        z.abs() * (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// Wald interval clamped to `[0, 1]`.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        let (p, h) = (self.point(), self.halfwidth(z));
        ((p - h).max(0.0), (p + h).min(1.0))
    }
}

/// Normal-approximation confidence interval for a binomial proportion.
pub fn binomial_ci(successes: u64, trials: u64, z: f64) -> Result<(f64, f64)> {
    Ok(ProportionEstimate::new(successes, trials)?.interval(z))
}

/// `z * s / sqrt(n)` with the sample standard deviation `s`; zero for fewer
/// than two values.
pub fn mean_ci_halfwidth(values: &[f64], z: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    z.abs() * (var / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wald_hand_values() {
        let (lo, hi) = binomial_ci(50, 100, 1.96).unwrap();
        assert!((lo - 0.402).abs() < 1e-12 && (hi - 0.598).abs() < 1e-12);
        assert_eq!(binomial_ci(0, 30, 1.96).unwrap(), (0.0, 0.0));
        assert_eq!(binomial_ci(30, 30, 1.96).unwrap(), (1.0, 1.0));
        let (lo, hi) = binomial_ci(1, 10, 1.96).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - (0.1 + 1.96 * (0.009f64).sqrt())).abs() < 1e-12);
    }

    #[test]
    fn width_scales_with_inverse_sqrt_n() {
        let w100 = ProportionEstimate::new(30, 100).unwrap().halfwidth(1.96);
        let w400 = ProportionEstimate::new(120, 400).unwrap().halfwidth(1.96);
        assert!((w400 - w100 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_counts() {
        assert!(matches!(binomial_ci(0, 0, 1.96), Err(Error::EmptySample)));
        assert!(matches!(
            binomial_ci(5, 4, 1.96),
            Err(Error::InvalidProportion { .. })
        ));
    }

    #[test]
    fn mean_halfwidth() {
        assert_eq!(mean_ci_halfwidth(&[1.0, 1.0, 1.0], 1.96), 0.0);
        assert_eq!(mean_ci_halfwidth(&[0.3], 1.96), 0.0);
        // s = 1, n = 4
        let h = mean_ci_halfwidth(&[0.0, 1.0, 2.0, 1.0], 2.0);
        assert!((h - 2.0 * (2.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
    }
}
