//! Standardized return samples.
//!
//! All smile estimators operate on dimensionless returns `u = r / (sigma
//! sqrt(T))`, centered and scaled so the sample mean is 0 and the sample
//! variance is 1. The variance uses the 1/N (population) normalization: the
//! estimator algebra relies on the exact identity `E[u^2] = 1`, which only the
//! population convention delivers on a finite sample.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Volatility regime a sample was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    #[default]
    All,
    HighVol,
    LowVol,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::All => "all",
            Regime::HighVol => "high_vol",
            Regime::LowVol => "low_vol",
        })
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Regime::All),
            "high" | "high_vol" => Ok(Regime::HighVol),
            "low" | "low_vol" => Ok(Regime::LowVol),
            other => Err(Error::invalid(format!("unknown regime '{other}'"))),
        }
    }
}

/// Location and scale removed from the raw returns during standardization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub raw_mean: f64,
    /// Population (1/N) standard deviation of the raw returns.
    pub raw_std: f64,
}

impl Default for Standardization {
    fn default() -> Self {
        Standardization { raw_mean: 0.0, raw_std: 1.0 }
    }
}

/// Standardized terminal returns for one horizon and regime.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    samples: Vec<f64>,
    pub horizon_days: u32,
    pub regime: Regime,
    /// Free-text provenance tag.
    pub source: String,
    pub standardization: Standardization,
    /// True when the samples come from overlapping return windows, in which
    /// case plain i.i.d. bootstrap errors understate the truth.
    pub overlapping: bool,
}

impl SampleSet {
    /// Wrap samples that are already (approximately) standardized, e.g. read
    /// back from a file or produced by resampling. Checks finiteness and the
    /// minimum count but not the mean/variance normalization.
    pub fn from_standardized(samples: Vec<f64>, horizon_days: u32) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InsufficientSamples { needed: 2, got: samples.len() });
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("samples must be finite"));
        }
        if horizon_days == 0 {
            return Err(Error::invalid("horizon_days must be positive"));
        }
        Ok(SampleSet {
            samples,
            horizon_days,
            regime: Regime::All,
            source: String::new(),
            standardization: Standardization::default(),
            overlapping: false,
        })
    }

    /// Same as [`from_standardized`](Self::from_standardized) but skips the
    /// per-element checks; used on hot resampling paths where the values are
    /// known to come from an existing `SampleSet`.
    pub(crate) fn from_resample(&self, samples: Vec<f64>) -> Self {
        SampleSet {
            samples,
            horizon_days: self.horizon_days,
            regime: self.regime,
            source: self.source.clone(),
            standardization: self.standardization,
            overlapping: self.overlapping,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn with_regime(mut self, regime: Regime) -> Self {
        self.regime = regime;
        self
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }
}

/// Center and scale raw fractional returns to mean 0, variance 1 (1/N).
///
/// Two passes are applied so the result satisfies the normalization to
/// machine precision regardless of the input's magnitude.
pub fn standardize(raw_returns: &[f64], horizon_days: u32) -> Result<SampleSet> {
    if raw_returns.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: raw_returns.len() });
    }
    if raw_returns.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("raw returns must be finite"));
    }
    if horizon_days == 0 {
        return Err(Error::invalid("horizon_days must be positive"));
    }

    let (mean, std) = mean_std(raw_returns);
    if std <= 0.0 || !std.is_finite() || std < 1e-15 * mean.abs() {
        return Err(Error::DegenerateSample);
    }
    let mut u: Vec<f64> = raw_returns.iter().map(|&r| (r - mean) / std).collect();

    // Second pass removes floating-point residue from the first.
    let (m2, s2) = mean_std(&u);
    if s2 <= 0.0 || !s2.is_finite() {
        return Err(Error::DegenerateSample);
    }
    for v in u.iter_mut() {
        *v = (*v - m2) / s2;
    }

    debug_assert!(mean_std(&u).0.abs() < 1e-12);
    debug_assert!((mean_std(&u).1 - 1.0).abs() < 1e-12);

    Ok(SampleSet {
        samples: u,
        horizon_days,
        regime: Regime::All,
        source: String::new(),
        standardization: Standardization { raw_mean: mean, raw_std: std },
        overlapping: false,
    })
}

/// Mean and population (1/N) standard deviation.
pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}
