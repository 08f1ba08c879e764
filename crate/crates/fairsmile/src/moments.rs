//! Moment statistics of standardized samples.
//!
//! Skewness is the third moment of the standardized variable; excess kurtosis
//! the fourth moment minus 3. Both use population (1/N) normalization, in
//! line with [`crate::sample::standardize`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::SampleSet;

/// Summary statistics of a return sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mean: f64,
    /// Population (1/N) standard deviation.
    pub std: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// Median (midpoint of the two central order statistics when the count
    /// is even).
    pub median: f64,
    pub count: usize,
}

/// Compute moments of a standardized sample.
pub fn compute_moments(sample: &SampleSet) -> Result<MomentSummary> {
    from_values(sample.samples())
}

/// Compute moments of arbitrary values (not necessarily standardized).
pub fn from_values(values: &[f64]) -> Result<MomentSummary> {
    if values.len() < 4 {
        return Err(Error::InsufficientSamplesForKurtosis { got: values.len() });
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if var <= 0.0 || !var.is_finite() {
        return Err(Error::DegenerateSample);
    }
    let std = var.sqrt();
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for v in values {
        let z = (v - mean) / std;
        let z2 = z * z;
        m3 += z2 * z;
        m4 += z2 * z2;
    }
    Ok(MomentSummary {
        mean,
        std,
        skewness: m3 / n,
        excess_kurtosis: m4 / n - 3.0,
        median: median(values)?,
        count: values.len(),
    })
}

/// Median as the midpoint of the two central order statistics.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("median requires finite values"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        Ok(sorted[n / 2])
    } else {
        Ok(0.5 * (sorted[n / 2 - 1] + sorted[n / 2]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn four_point_known_values() {
        // {-2,-1,1,2}: mean 0, var 2.5, symmetric so skew 0,
        // m4 = 2*(16+1)/4 = 8.5, kurt = 8.5/6.25 - 3 = -1.64.
        let m = from_values(&[-2.0, -1.0, 1.0, 2.0]).unwrap();
        assert!((m.mean - 0.0).abs() < 1e-15);
        assert!((m.std - 2.5f64.sqrt()).abs() < 1e-15);
        assert!(m.skewness.abs() < 1e-15);
        assert!((m.excess_kurtosis - (-1.64)).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_sample_skew() {
        // {0,0,0,4}: mean 1, var 3, skew = E[((x-1)/sqrt(3))^3]
        //   = (3*(-1)^3 + 27)/(4*3^1.5) = 24/(4*5.196...) = 2/sqrt(3).
        let m = from_values(&[0.0, 0.0, 0.0, 4.0]).unwrap();
        assert!((m.skewness - 2.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn exponential_moments() {
        // Exp(1) shifted to mean 0: skewness 2, excess kurtosis 6,
        // median ln 2 − 1 ≈ −0.3069.
        let mut rng = crate::rng::substream(7, 0);
        let vals: Vec<f64> = (0..400_000)
            .map(|_| -rng.gen::<f64>().max(f64::MIN_POSITIVE).ln() - 1.0)
            .collect();
        let m = from_values(&vals).unwrap();
        assert!((m.skewness - 2.0).abs() < 0.05, "skew {}", m.skewness);
        assert!((m.excess_kurtosis - 6.0).abs() < 0.4, "kurt {}", m.excess_kurtosis);
        assert!((m.median - (2f64.ln() - 1.0)).abs() < 0.01, "median {}", m.median);
    }

    #[test]
    fn gaussian_moments_near_zero() {
        let mut rng = crate::rng::substream(11, 0);
        let vals: Vec<f64> = (0..200_000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let m = from_values(&vals).unwrap();
        assert!(m.skewness.abs() < 0.03);
        assert!(m.excess_kurtosis.abs() < 0.06);
    }

    #[test]
    fn two_point_distribution() {
        let m = from_values(&[-1.0, 1.0, -1.0, 1.0]).unwrap();
        assert_eq!(m.skewness, 0.0);
        assert_eq!(m.excess_kurtosis, -2.0);
        // Feasibility bound κ ≥ S² − 2 is tight here.
        assert!(m.excess_kurtosis >= m.skewness.powi(2) - 2.0 - 1e-12);
    }

    #[test]
    fn too_few_for_kurtosis() {
        let err = from_values(&[1.0, 2.0, 3.0]).unwrap_err();
        assert!(err.to_string().contains("kurtosis"));
    }

    #[test]
    fn median_odd_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]).unwrap(), 2.5);
        assert!(median(&[]).is_err());
    }
}
