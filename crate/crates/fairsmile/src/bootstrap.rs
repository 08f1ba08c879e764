//! Bootstrap standard errors.
//!
//! Plain i.i.d. resampling with replacement, plus a circular block variant
//! for serially dependent samples (overlapping return windows). Resamples are
//! drawn from counter-derived RNG substreams, so results do not depend on how
//! many threads rayon happens to use.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sample::SampleSet;

/// How bootstrap errors are computed by the higher-level estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BootstrapConfig {
    pub n_boot: usize,
    pub seed: u64,
    /// `Some(l)` switches to the circular block bootstrap with block length
    /// `l`; use the window length for overlapping-window samples.
    pub block_len: Option<usize>,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig { n_boot: 200, seed: 0, block_len: None }
    }
}

impl BootstrapConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Pick the block length from the sample: window length for overlapping
    /// samples, i.i.d. otherwise.
    pub fn for_sample(mut self, sample: &SampleSet) -> Self {
        if self.block_len.is_none() && sample.overlapping {
            self.block_len = Some(sample.horizon_days as usize);
        }
        self
    }
}

/// Standard error of `estimator` over `n_boot` i.i.d. resamples.
///
/// Deterministic given `seed`, independent of thread count.
pub fn bootstrap_se<F>(estimator: F, sample: &SampleSet, n_boot: usize, seed: u64) -> Result<f64>
where
    F: Fn(&SampleSet) -> Result<f64> + Sync,
{
    resampled_se(sample, n_boot, seed, &estimator, |rng, n, out| {
        for _ in 0..n {
            out.push(rng.gen_range(0..n));
        }
    })
}

/// Standard error of `estimator` over circular block-bootstrap resamples.
///
/// Blocks of `block_len` consecutive values (wrapping at the end) are drawn
/// with replacement until `n` values are collected; the tail block is
/// truncated. Preserves serial dependence up to the block length.
pub fn block_bootstrap_se<F>(
    estimator: F,
    sample: &SampleSet,
    block_len: usize,
    n_boot: usize,
    seed: u64,
) -> Result<f64>
where
    F: Fn(&SampleSet) -> Result<f64> + Sync,
{
    let n = sample.len();
    if block_len == 0 || block_len > n {
        return Err(Error::invalid(format!(
            "block length {block_len} must be in 1..={n}"
        )));
    }
    resampled_se(sample, n_boot, seed, &estimator, move |rng, n, out| {
        while out.len() < n {
            let start = rng.gen_range(0..n);
            for k in 0..block_len.min(n - out.len()) {
                out.push((start + k) % n);
            }
        }
    })
}

/// Dispatch on [`BootstrapConfig`].
pub fn config_bootstrap_se<F>(
    estimator: F,
    sample: &SampleSet,
    config: &BootstrapConfig,
) -> Result<f64>
where
    F: Fn(&SampleSet) -> Result<f64> + Sync,
{
    match config.block_len {
        Some(l) => block_bootstrap_se(estimator, sample, l, config.n_boot, config.seed),
        None => bootstrap_se(estimator, sample, config.n_boot, config.seed),
    }
}

fn resampled_se<F, D>(
    sample: &SampleSet,
    n_boot: usize,
    seed: u64,
    estimator: &F,
    draw_indices: D,
) -> Result<f64>
where
    F: Fn(&SampleSet) -> Result<f64> + Sync,
    D: Fn(&mut rand_chacha::ChaCha8Rng, usize, &mut Vec<usize>) + Sync,
{
    if n_boot < 100 {
        return Err(Error::invalid(format!("n_boot must be at least 100, got {n_boot}")));
    }
    let n = sample.len();
    let values = sample.samples();

    let estimates: Vec<Result<f64>> = (0..n_boot)
        .into_par_iter()
        .map(|b| {
            let mut rng = crate::rng::substream(seed, b as u64);
            let mut idx = Vec::with_capacity(n);
            draw_indices(&mut rng, n, &mut idx);
            let resampled: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
            estimator(&sample.from_resample(resampled))
        })
        .collect();

    let mut vals = Vec::with_capacity(n_boot);
    for e in estimates {
        vals.push(e?);
    }
    let (_, sd) = crate::sample::mean_std(&vals);
    Ok(sd)
}
