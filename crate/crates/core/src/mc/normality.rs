//! Sample moments and Kolmogorov-Smirnov normality tests.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::sum::{ksum, CompensatedSum};

pub const MIN_SAMPLES: usize = 100;

/// Moments of a sample with Monte Carlo standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// `sd / sqrt(R)`.
    pub se_mean: f64,
    /// `sqrt((m4 - m2^2) / R)`.
    pub se_variance: f64,
    /// `sqrt(6 / R)`.
    pub se_skewness: f64,
    /// `sqrt(24 / R)`.
    pub se_kurtosis: f64,
}

impl Moments {
    pub fn of(xs: &[f64]) -> Self {
        let r = xs.len() as f64;
        let mean = ksum(xs.iter().copied()) / r;
        let (mut m2, mut m3, mut m4) = (
            CompensatedSum::new(),
            CompensatedSum::new(),
            CompensatedSum::new(),
        );
        for x in xs {
            let d = x - mean;
            let d2 = d * d;
            m2.add(d2);
            m3.add(d2 * d);
            m4.add(d2 * d2);
        }
        let (m2, m3, m4) = (m2.value() / r, m3.value() / r, m4.value() / r);
        let variance = if xs.len() > 1 { m2 * r / (r - 1.0) } else { 0.0 };
        let (skewness, excess_kurtosis) = if m2 > 0.0 {
            (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
        } else {
            (0.0, 0.0)
        };
        Self {
            count: xs.len(),
            mean,
            variance,
            skewness,
            excess_kurtosis,
            se_mean: (variance / r).sqrt(),
            se_variance: ((m4 - m2 * m2).max(0.0) / r).sqrt(),
            se_skewness: (6.0 / r).sqrt(),
            se_kurtosis: (24.0 / r).sqrt(),
        }
    }

    /// `|mean - target| <= k * se_mean`.
    pub fn mean_within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.se_mean
    }

    /// `|variance - target| <= k * se_variance`.
    pub fn variance_within(&self, target: f64, k: f64) -> bool {
        (self.variance - target).abs() <= k * self.se_variance
    }
}

/// Outcome of [`normality_tests`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityResult {
    pub ks_stat: f64,
    pub ks_pvalue: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub se_skewness: f64,
    pub se_kurtosis: f64,
}

impl NormalityResult {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.ks_pvalue < alpha
    }
}

/// Survival function of the Kolmogorov distribution, `P(K > lambda)`.
pub fn kolmogorov_pvalue(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let p = if lambda < 0.3 {
        // alternating series converges slowly here; use the theta-function form
        let mut s = 0.0;
        for k in 1..=100 {
            let a = (2 * k - 1) as f64 * PI / lambda;
            s += (-a * a / 8.0).exp();
        }
        1.0 - (2.0 * PI).sqrt() / lambda * s
    } else {
        let mut s = 0.0;
        for k in 1..=100u32 {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            s += sign * (-2.0 * (k as f64 * lambda).powi(2)).exp();
        }
        2.0 * s
    };
    p.clamp(0.0, 1.0)
}

/// KS distance between the empirical CDF of `z` and `cdf`.
fn ks_distance(z: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    z.sort_by(f64::total_cmp);
    let r = z.len() as f64;
    z.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i as f64 + 1.0) / r - f).max(f - i as f64 / r)
    })
}

fn standard_normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// One-sample KS test against `N(mean, var)` of the sample, with sample
/// skewness and excess kurtosis.
pub fn normality_tests(samples: &[f64]) -> Result<NormalityResult> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            required: MIN_SAMPLES,
            got: samples.len(),
        });
    }
    let m = Moments::of(samples);
    let sd = m.variance.sqrt();
    let mut z: Vec<f64> = samples
        .iter()
        .map(|x| if sd > 0.0 { (x - m.mean) / sd } else { 0.0 })
        .collect();
    let d = ks_distance(&mut z, standard_normal_cdf);
    Ok(NormalityResult {
        ks_stat: d,
        ks_pvalue: kolmogorov_pvalue((samples.len() as f64).sqrt() * d),
        skewness: m.skewness,
        excess_kurtosis: m.excess_kurtosis,
        se_skewness: m.se_skewness,
        se_kurtosis: m.se_kurtosis,
    })
}

/// KS test of already standardized values against `N(0, 1)`.
pub fn ks_standard_normal(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            required: MIN_SAMPLES,
            got: samples.len(),
        });
    }
    let mut z = samples.to_vec();
    let d = ks_distance(&mut z, standard_normal_cdf);
    Ok((d, kolmogorov_pvalue((samples.len() as f64).sqrt() * d)))
}

/// `(theoretical, empirical)` normal quantile pairs at `points` probabilities
/// `(i - 1/2) / points`, after standardizing by sample mean and sd.
pub fn qq_points(samples: &[f64], points: usize) -> Vec<(f64, f64)> {
    let m = Moments::of(samples);
    let sd = m.variance.sqrt();
    let mut z: Vec<f64> = samples
        .iter()
        .map(|x| if sd > 0.0 { (x - m.mean) / sd } else { 0.0 })
        .collect();
    z.sort_by(f64::total_cmp);
    let normal = Normal::standard();
    (0..points)
        .map(|i| {
            let p = (i as f64 + 0.5) / points as f64;
            (normal.inverse_cdf(p), quantile_sorted(&z, p))
        })
        .collect()
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(z: &[f64], p: f64) -> f64 {
    let h = (z.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(z.len() - 1);
    z[lo] + (h - lo as f64) * (z[hi] - z[lo])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{sample_innovations, InnovationSpec};
    use approx::assert_relative_eq;

    #[test]
    fn kolmogorov_known_values() {
        // P(K > 1.36) ~ 0.049, P(K > 1.63) ~ 0.010
        assert_relative_eq!(kolmogorov_pvalue(1.358), 0.05, epsilon = 1e-3);
        assert_relative_eq!(kolmogorov_pvalue(1.628), 0.01, epsilon = 3e-4);
        assert_eq!(kolmogorov_pvalue(0.0), 1.0);
        // the two series agree where both converge
        let a = kolmogorov_pvalue(0.3 - 1e-12);
        let b = kolmogorov_pvalue(0.3 + 1e-12);
        assert!((a - b).abs() < 1e-9);
        assert!(kolmogorov_pvalue(5.0) < 1e-20);
    }

    #[test]
    fn gaussian_samples_pass() {
        let x = sample_innovations(&InnovationSpec::gaussian(), 100_000, 2024);
        let r = normality_tests(&x).unwrap();
        assert!(r.ks_pvalue > 0.001, "{r:?}");
        assert!(r.skewness.abs() < 5.0 * r.se_skewness);
        let (_, p) = ks_standard_normal(&x).unwrap();
        assert!(p > 0.001);
    }

    #[test]
    fn constant_samples_reject() {
        let r = normality_tests(&vec![3.0; 500]).unwrap();
        assert_eq!(r.ks_stat, 0.5);
        assert!(r.rejects(0.01));
    }

    #[test]
    fn chi_square_rejects() {
        let x = sample_innovations(&InnovationSpec::gaussian(), 10_000, 7);
        let chi: Vec<f64> = x.iter().map(|v| (v * v - 1.0) / 2f64.sqrt()).collect();
        let r = normality_tests(&chi).unwrap();
        assert!(r.rejects(0.01), "{r:?}");
        assert!((r.skewness - 8f64.sqrt()).abs() < 0.5, "{}", r.skewness);
    }

    #[test]
    fn insufficient_samples() {
        assert!(matches!(
            normality_tests(&[0.0; 99]),
            Err(Error::InsufficientSamples { required: 100, got: 99 })
        ));
    }

    #[test]
    fn moments_of_known_sample() {
        let m = Moments::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_relative_eq!(m.mean, 2.5);
        assert_relative_eq!(m.variance, 5.0 / 3.0);
        assert_relative_eq!(m.skewness, 0.0);
        // m2 = 1.25, m4 = 2.5625
        assert_relative_eq!(m.excess_kurtosis, 2.5625 / 1.5625 - 3.0, max_relative = 1e-14);
    }

    #[test]
    fn qq_is_monotone() {
        let x = sample_innovations(&InnovationSpec::gaussian(), 1000, 3);
        let qq = qq_points(&x, 200);
        assert_eq!(qq.len(), 200);
        assert!(qq.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1));
    }
}
