//! Sample summaries, confidence intervals and Kolmogorov–Smirnov tests.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance; `None` when `count < 2`.
    pub variance: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub level: f64,
}

impl SummaryStats {
    /// Mean, unbiased variance and a t-interval at `level`.
    ///
    /// Sums run over the sorted sample, so any permutation of the input gives
    /// bit-identical output.
    pub fn from_samples(samples: &[f64], level: f64) -> Result<Self> {
        if !(level > 0.0 && level < 1.0) {
            return Err(invalid(format!("confidence level must lie in (0, 1), got {level}")));
        }
        if samples.is_empty() {
            return Err(Error::InsufficientReplications { required: 1, got: 0 });
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(invalid("samples must be finite"));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let mean = sorted.iter().sum::<f64>() / n as f64;
        if n < 2 {
            return Ok(Self {
                count: n,
                mean,
                variance: None,
                ci_low: None,
                ci_high: None,
                level,
            });
        }
        let mut dev: Vec<f64> = sorted.iter().map(|x| (x - mean).powi(2)).collect();
        dev.sort_by(f64::total_cmp);
        let variance = dev.iter().sum::<f64>() / (n - 1) as f64;
        let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
            .expect("valid degrees of freedom")
            .inverse_cdf(0.5 + level / 2.0);
        let half = t * (variance / n as f64).sqrt();
        Ok(Self {
            count: n,
            mean,
            variance: Some(variance),
            ci_low: Some(mean - half),
            ci_high: Some(mean + half),
            level,
        })
    }

    pub fn half_width(&self) -> Option<f64> {
        Some(self.ci_high? - self.mean)
    }
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.2 {
        // the alternating series converges too slowly; the value is 1 to double precision
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Asymptotic p-value with the usual small-sample correction of the scaling.
fn ks_p_value(d: f64, en: f64) -> f64 {
    let s = en.sqrt();
    kolmogorov_survival((s + 0.12 + 0.11 / s) * d)
}

/// One-sample test of `samples` against a fully specified continuous cdf.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(Error::InsufficientReplications { required: 1, got: 0 });
    }
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mut d: f64 = 0.0;
    for (i, xi) in x.iter().enumerate() {
        let f = cdf(*xi);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(KsResult {
        statistic: d,
        p_value: ks_p_value(d, n),
    })
}

/// One-sample test against `Normal(0, variance)`.
pub fn ks_normal(samples: &[f64], variance: f64) -> Result<KsResult> {
    if !(variance > 0.0) {
        return Err(invalid("normal reference needs positive variance"));
    }
    let dist = Normal::new(0.0, variance.sqrt()).map_err(|e| invalid(e.to_string()))?;
    ks_one_sample(samples, |x| dist.cdf(x))
}

/// Two-sample test. Ties are handled by advancing both empirical cdfs past
/// each shared value before taking the difference.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientReplications { required: 1, got: 0 });
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let en = (n * m) as f64 / (n + m) as f64;
    Ok(KsResult {
        statistic: d,
        p_value: ks_p_value(d, en),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_by_hand() {
        let s = SummaryStats::from_samples(&[1.0, 2.0, 3.0, 4.0], 0.95).unwrap();
        assert_eq!(s.mean, 2.5);
        assert!((s.variance.unwrap() - 5.0 / 3.0).abs() < 1e-15);
        // t_{0.975, 3} = 3.182446305
        let half = 3.182446305284263 * (5.0f64 / 3.0 / 4.0).sqrt();
        assert!((s.half_width().unwrap() - half).abs() < 1e-9);
    }

    #[test]
    fn single_sample_has_no_variance() {
        let s = SummaryStats::from_samples(&[0.7], 0.99).unwrap();
        assert_eq!(s.variance, None);
        assert_eq!(s.ci_low, None);
    }

    #[test]
    fn bad_level_rejected() {
        assert!(SummaryStats::from_samples(&[1.0, 2.0], 1.0).is_err());
    }

    #[test]
    fn kolmogorov_reference_values() {
        // P(K > 1.36) ~ 0.0494, P(K > 1.63) ~ 0.0098
        assert!((kolmogorov_survival(1.36) - 0.04946).abs() < 1e-4);
        assert!((kolmogorov_survival(1.628) - 0.01).abs() < 2e-4);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
    }

    #[test]
    fn two_sample_identical_is_zero() {
        let a = [1.0, 2.0, 2.0, 3.0];
        let r = ks_two_sample(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn two_sample_disjoint_is_one() {
        let r = ks_two_sample(&[1.0, 2.0], &[3.0, 4.0, 5.0]).unwrap();
        assert_eq!(r.statistic, 1.0);
    }

    #[test]
    fn one_sample_uniform_grid() {
        let x: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let r = ks_one_sample(&x, |t| t.clamp(0.0, 1.0)).unwrap();
        assert!((r.statistic - 0.005).abs() < 1e-12);
        assert!(r.p_value > 0.99);
    }
}
