//! Variance-reduced pricing of the exotic payoffs on path ensembles.
//!
//! Instead of regressing optimal hedges, each payoff is hedged with the
//! closed-form Gaussian (Bachelier) delta of its own price — a deliberately
//! sub-optimal hedge that nevertheless strips most of the payoff variance
//! and whose increments have zero mean, leaving the estimator unbiased:
//!
//! ```text
//! estimate_i = f(u_i) - sum_t Delta(x_t, v_t) (x_{t+1} - x_t)
//! ```
//!
//! Paths are standardized so the terminal value has mean 0 and variance 1;
//! with a flat hedge vol the remaining variance fraction after step t is
//! v_t = (n - t)/n.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::{norm_cdf, norm_pdf, SQRT_2PI, SQRT_PI_OVER_2};
use crate::models::PathEnsemble;
use crate::sample::mean_std;
use crate::smile::{KernelConfig, Method, SmileCoefficients};

/// The three payoffs behind the smile coefficients, as functions of the
/// standardized terminal return u.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ExoticPayoff {
    /// |u|; prices the smile level alpha.
    Straddle,
    /// 1 if u > 0 (1/2 exactly at zero); prices the skew beta.
    Binary,
    /// exp(-u^2 / 2 delta^2) / sqrt(2 pi delta^2); a "no-move" option whose
    /// delta -> 0 limit prices the curvature gamma.
    GaussianWindow { delta: f64 },
}

impl ExoticPayoff {
    pub fn validate(&self) -> Result<()> {
        if let ExoticPayoff::GaussianWindow { delta } = self {
            if !(*delta > 0.0 && delta.is_finite()) {
                return Err(Error::invalid(format!(
                    "gaussian window width must be positive, got {delta}"
                )));
            }
        }
        Ok(())
    }

    /// Payoff at terminal standardized return u.
    pub fn evaluate(&self, u: f64) -> f64 {
        match self {
            ExoticPayoff::Straddle => u.abs(),
            ExoticPayoff::Binary => {
                if u > 0.0 {
                    1.0
                } else if u == 0.0 {
                    0.5
                } else {
                    0.0
                }
            }
            ExoticPayoff::GaussianWindow { delta } => {
                (-u * u / (2.0 * delta * delta)).exp() / (delta * SQRT_2PI)
            }
        }
    }

    /// Gaussian-model price C(x, v) = E[f(x + sqrt(v) Z)], the function the
    /// hedge delta differentiates.
    pub fn gaussian_price(&self, x: f64, v: f64) -> f64 {
        let sd = v.sqrt();
        match self {
            ExoticPayoff::Straddle => {
                let d = x / sd;
                2.0 * sd * norm_pdf(d) + x * (2.0 * norm_cdf(d) - 1.0)
            }
            ExoticPayoff::Binary => norm_cdf(x / sd),
            ExoticPayoff::GaussianWindow { delta } => {
                let s = v + delta * delta;
                (-x * x / (2.0 * s)).exp() / (s.sqrt() * SQRT_2PI)
            }
        }
    }

    /// dC/dx without argument checks; v must be positive.
    fn delta_raw(&self, x: f64, v: f64) -> f64 {
        match self {
            ExoticPayoff::Straddle => 2.0 * norm_cdf(x / v.sqrt()) - 1.0,
            ExoticPayoff::Binary => {
                let sd = v.sqrt();
                norm_pdf(x / sd) / sd
            }
            ExoticPayoff::GaussianWindow { delta } => {
                let s = v + delta * delta;
                -x / s * (-x * x / (2.0 * s)).exp() / (s.sqrt() * SQRT_2PI)
            }
        }
    }
}

/// Black-Scholes-style delta of the payoff's Gaussian price at running
/// standardized return `x` with remaining variance fraction `v`.
pub fn gaussian_hedge_delta(payoff: &ExoticPayoff, x: f64, v: f64) -> Result<f64> {
    payoff.validate()?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::invalid(format!("remaining variance must be positive, got {v}")));
    }
    Ok(payoff.delta_raw(x, v))
}

/// How (and whether) the delta hedge is applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HedgeConfig {
    pub enabled: bool,
    /// Per sqrt(day) vol assumed by the delta formulas. None uses the
    /// ensemble's own realized terminal std — the default, and the right
    /// choice unless probing hedge mis-specification.
    pub hedge_vol: Option<f64>,
    /// Rebalance the hedge every this many steps (1 = daily).
    pub rebalance_every: usize,
}

impl Default for HedgeConfig {
    fn default() -> Self {
        HedgeConfig { enabled: true, hedge_vol: None, rebalance_every: 1 }
    }
}

impl HedgeConfig {
    pub const fn disabled() -> Self {
        HedgeConfig { enabled: false, hedge_vol: None, rebalance_every: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(hv) = self.hedge_vol {
            if !(hv > 0.0 && hv.is_finite()) {
                return Err(Error::invalid(format!("hedge_vol must be positive, got {hv}")));
            }
        }
        if self.rebalance_every == 0 {
            return Err(Error::invalid("rebalance_every must be at least 1"));
        }
        Ok(())
    }
}

/// A Monte Carlo price with its error bar and the variance the hedge saved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_paths: usize,
    /// var(hedged estimator) / var(raw payoff); 1 when hedging is off.
    pub variance_ratio: f64,
}

pub(crate) type PayoffFn<'a> = Box<dyn Fn(f64) -> f64 + Sync + 'a>;
pub(crate) type DeltaFn<'a> = Box<dyn Fn(f64, f64) -> f64 + Sync + 'a>;

/// Hedged per-path estimators for several payoffs in one pass over the
/// ensemble. Row k of the result is payoff k's estimator on every path.
///
/// Paths are walked in standardized space: x accumulates the demeaned
/// per-step returns divided by the terminal std, so x_n is exactly the
/// standardized terminal return (one standardization pass).
pub(crate) fn estimator_matrix(
    e: &PathEnsemble,
    pairs: &[(PayoffFn<'_>, DeltaFn<'_>)],
    h: &HedgeConfig,
) -> Result<Vec<Vec<f64>>> {
    use rayon::prelude::*;

    h.validate()?;
    if e.n_paths < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: e.n_paths });
    }
    let n = e.n_steps;
    let k = pairs.len();
    let terminal = e.terminal_returns();
    let (mean_t, std_t) = mean_std(&terminal);
    if std_t <= 0.0 || !std_t.is_finite() {
        return Err(Error::DegenerateSample);
    }
    // Total variance the hedge assumes, as a fraction of realized variance.
    let v_total = match h.hedge_vol {
        Some(hv) => hv * hv * (n as f64) * e.step_days / (std_t * std_t),
        None => 1.0,
    };
    let drift = mean_t / n as f64;
    let q = h.rebalance_every;

    let per_path: Vec<Vec<f64>> = (0..e.n_paths)
        .into_par_iter()
        .map(|i| {
            let path = e.path(i);
            let mut x = 0.0f64;
            let mut hedge_pnl = vec![0.0f64; k];
            let mut deltas = vec![0.0f64; k];
            let mut x_anchor = 0.0f64;
            if h.enabled {
                for (t, r) in path.iter().enumerate() {
                    if t % q == 0 {
                        let v = v_total * ((n - t) as f64) / n as f64;
                        for (j, (_, delta)) in pairs.iter().enumerate() {
                            hedge_pnl[j] += deltas[j] * (x - x_anchor);
                            deltas[j] = delta(x, v);
                        }
                        x_anchor = x;
                    }
                    x += (r - drift) / std_t;
                }
                for (j, pnl) in hedge_pnl.iter_mut().enumerate() {
                    *pnl += deltas[j] * (x - x_anchor);
                }
            } else {
                x = (terminal[i] - mean_t) / std_t;
            }
            pairs
                .iter()
                .enumerate()
                .map(|(j, (payoff, _))| payoff(x) - hedge_pnl[j])
                .collect()
        })
        .collect();

    let mut rows: Vec<Vec<f64>> = (0..k).map(|_| Vec::with_capacity(e.n_paths)).collect();
    for path_vals in per_path {
        for (j, v) in path_vals.into_iter().enumerate() {
            rows[j].push(v);
        }
    }
    Ok(rows)
}

fn payoff_pair(p: ExoticPayoff) -> (PayoffFn<'static>, DeltaFn<'static>) {
    (
        Box::new(move |u| p.evaluate(u)),
        Box::new(move |x, v| p.delta_raw(x, v)),
    )
}

/// Price one exotic payoff on the ensemble, with the delta-hedge control
/// variate when enabled.
pub fn hedged_price(
    e: &PathEnsemble,
    payoff: &ExoticPayoff,
    h: &HedgeConfig,
) -> Result<PriceEstimate> {
    payoff.validate()?;
    let pairs = vec![payoff_pair(*payoff)];
    let estimators = estimator_matrix(e, &pairs, h)?.pop().expect("one payoff in, one row out");
    let (value, sd) = mean_std(&estimators);

    let variance_ratio = if h.enabled {
        let raw = estimator_matrix(e, &vec![payoff_pair(*payoff)], &HedgeConfig::disabled())?
            .pop()
            .expect("one row");
        let (_, raw_sd) = mean_std(&raw);
        if raw_sd > 0.0 {
            (sd * sd) / (raw_sd * raw_sd)
        } else {
            1.0
        }
    } else {
        1.0
    };

    Ok(PriceEstimate {
        value,
        std_error: sd / (e.n_paths as f64).sqrt(),
        n_paths: e.n_paths,
        variance_ratio,
    })
}

/// Smile coefficients by pricing the three exotics on the ensemble, with
/// path-bootstrap standard errors. Bootstrap seed derives from the ensemble
/// seed, so identical inputs give identical error bars.
pub fn smile_via_exotics(
    e: &PathEnsemble,
    k: &KernelConfig,
    h: &HedgeConfig,
) -> Result<SmileCoefficients> {
    smile_via_exotics_boot(e, k, h, 200, e.seed ^ 0xB007_5EED)
}

/// [`smile_via_exotics`] with explicit bootstrap controls.
pub fn smile_via_exotics_boot(
    e: &PathEnsemble,
    k: &KernelConfig,
    h: &HedgeConfig,
    n_boot: usize,
    boot_seed: u64,
) -> Result<SmileCoefficients> {
    use rand::Rng;
    use rayon::prelude::*;

    k.validate()?;
    if n_boot < 100 {
        return Err(Error::invalid(format!("n_boot must be at least 100, got {n_boot}")));
    }

    let mut payoffs = vec![ExoticPayoff::Straddle, ExoticPayoff::Binary];
    for &delta in &k.delta_grid {
        payoffs.push(ExoticPayoff::GaussianWindow { delta });
    }
    let pairs: Vec<_> = payoffs.iter().map(|p| payoff_pair(*p)).collect();
    let rows = estimator_matrix(e, &pairs, h)?;
    let n_paths = e.n_paths;
    let nf = n_paths as f64;

    // Per-window standard errors weight the delta -> 0 extrapolation.
    let window_weights: Vec<f64> = rows[2..]
        .iter()
        .map(|r| {
            let (_, sd) = mean_std(r);
            sd / nf.sqrt()
        })
        .collect();

    let coeffs_from_means = |means: &[f64]| -> Result<(f64, f64, f64)> {
        let alpha = SQRT_PI_OVER_2 * means[0];
        let beta = SQRT_PI_OVER_2 * (1.0 - 2.0 * means[1]);
        let p0 = crate::smile::extrapolate_weighted(
            &k.delta_grid,
            &means[2..],
            &window_weights,
            k.extrapolation_order,
        )?;
        let gamma = SQRT_PI_OVER_2 * p0 - 1.0 / (2.0 * alpha);
        Ok((alpha, beta, gamma))
    };

    let full_means: Vec<f64> =
        rows.iter().map(|r| r.iter().sum::<f64>() / nf).collect();
    let (alpha, beta, gamma) = coeffs_from_means(&full_means)?;

    let resampled: Vec<Result<(f64, f64, f64)>> = (0..n_boot)
        .into_par_iter()
        .map(|b| {
            let mut rng = crate::rng::substream(boot_seed, b as u64);
            let mut sums = vec![0.0f64; rows.len()];
            for _ in 0..n_paths {
                let i = rng.gen_range(0..n_paths);
                for (j, row) in rows.iter().enumerate() {
                    sums[j] += row[i];
                }
            }
            for s in sums.iter_mut() {
                *s /= nf;
            }
            coeffs_from_means(&sums)
        })
        .collect();

    let mut aa = Vec::with_capacity(n_boot);
    let mut bb = Vec::with_capacity(n_boot);
    let mut gg = Vec::with_capacity(n_boot);
    for r in resampled {
        let (a, b, g) = r?;
        aa.push(a);
        bb.push(b);
        gg.push(g);
    }

    Ok(SmileCoefficients {
        alpha,
        beta,
        gamma,
        alpha_se: Some(mean_std(&aa).1),
        beta_se: Some(mean_std(&bb).1),
        gamma_se: Some(mean_std(&gg).1),
        horizon_days: e.horizon_days(),
        method: Method::ExoticMc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{simulate_gaarch, simulate_gaussian, GaarchParams};
    use crate::sample::Regime;

    #[test]
    fn payoff_values() {
        assert_eq!(ExoticPayoff::Straddle.evaluate(-2.0), 2.0);
        assert_eq!(ExoticPayoff::Binary.evaluate(1.0), 1.0);
        assert_eq!(ExoticPayoff::Binary.evaluate(-1.0), 0.0);
        assert_eq!(ExoticPayoff::Binary.evaluate(0.0), 0.5);
        let w = ExoticPayoff::GaussianWindow { delta: 0.5 };
        assert!((w.evaluate(0.0) - 1.0 / (0.5 * SQRT_2PI)).abs() < 1e-15);
        assert!(w.evaluate(3.0) < w.evaluate(0.1));
    }

    #[test]
    fn invalid_window_rejected() {
        let w = ExoticPayoff::GaussianWindow { delta: 0.0 };
        assert!(w.validate().is_err());
        assert!(gaussian_hedge_delta(&w, 0.0, 1.0).is_err());
    }

    #[test]
    fn delta_trivial_points() {
        let d = gaussian_hedge_delta(&ExoticPayoff::Straddle, 0.0, 0.5).unwrap();
        assert_eq!(d, 0.0);
        let d = gaussian_hedge_delta(&ExoticPayoff::Binary, 0.0, 1.0).unwrap();
        assert!((d - crate::gauss::INV_SQRT_2PI).abs() < 1e-15);
        let d =
            gaussian_hedge_delta(&ExoticPayoff::GaussianWindow { delta: 0.3 }, 0.0, 0.7).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn delta_requires_positive_variance() {
        assert!(gaussian_hedge_delta(&ExoticPayoff::Straddle, 0.1, 0.0).is_err());
        assert!(gaussian_hedge_delta(&ExoticPayoff::Straddle, 0.1, -0.5).is_err());
    }

    #[test]
    fn deltas_match_finite_differences() {
        let payoffs = [
            ExoticPayoff::Straddle,
            ExoticPayoff::Binary,
            ExoticPayoff::GaussianWindow { delta: 0.3 },
        ];
        let xs = [-1.5, -0.5, 0.0, 0.7, 1.2];
        let vs = [0.1, 0.35, 0.7, 1.0];
        let h = 1e-5;
        for p in &payoffs {
            for &x in &xs {
                for &v in &vs {
                    let fd = (p.gaussian_price(x + h, v) - p.gaussian_price(x - h, v)) / (2.0 * h);
                    let an = p.delta_raw(x, v);
                    assert!((fd - an).abs() < 1e-6, "{p:?} x={x} v={v}: {fd} vs {an}");
                }
            }
        }
    }

    #[test]
    fn price_at_full_variance_matches_expectation() {
        // C(0, 1) is the unconditional Gaussian price of each payoff.
        let straddle = ExoticPayoff::Straddle.gaussian_price(0.0, 1.0);
        assert!((straddle - (2.0f64 / std::f64::consts::PI).sqrt()).abs() < 1e-15);
        assert!((ExoticPayoff::Binary.gaussian_price(0.0, 1.0) - 0.5).abs() < 1e-15);
        let w = ExoticPayoff::GaussianWindow { delta: 0.5 };
        let s: f64 = 1.25;
        assert!((w.gaussian_price(0.0, 1.0) - 1.0 / (s.sqrt() * SQRT_2PI)).abs() < 1e-15);
    }

    #[test]
    fn constant_payoff_has_zero_error() {
        let e = simulate_gaussian(0.01, 5, 200, 1).unwrap();
        let pairs: Vec<(PayoffFn<'_>, DeltaFn<'_>)> =
            vec![(Box::new(|_| 3.5), Box::new(|_, _| 0.0))];
        let row = estimator_matrix(&e, &pairs, &HedgeConfig::disabled()).unwrap().pop().unwrap();
        let (value, sd) = mean_std(&row);
        assert_eq!(value, 3.5);
        assert_eq!(sd, 0.0);
    }

    #[test]
    fn unhedged_straddle_recovers_gaussian_mean() {
        let e = simulate_gaussian(0.01, 20, 10_000, 2).unwrap();
        let p = hedged_price(&e, &ExoticPayoff::Straddle, &HedgeConfig::disabled()).unwrap();
        let target = (2.0f64 / std::f64::consts::PI).sqrt(); // E|Z| ~ 0.7979
        assert!((p.value - target).abs() < 3.0 * p.std_error.max(0.003), "{}", p.value);
        assert_eq!(p.variance_ratio, 1.0);
    }

    #[test]
    fn hedging_reduces_variance_and_keeps_value() {
        let e = simulate_gaussian(0.01, 20, 10_000, 3).unwrap();
        let off = hedged_price(&e, &ExoticPayoff::Straddle, &HedgeConfig::disabled()).unwrap();
        let on = hedged_price(&e, &ExoticPayoff::Straddle, &HedgeConfig::default()).unwrap();
        let combined = (off.std_error.powi(2) + on.std_error.powi(2)).sqrt();
        assert!((on.value - off.value).abs() < 2.0 * combined, "{} vs {}", on.value, off.value);
        assert!(on.variance_ratio < 0.5, "ratio {}", on.variance_ratio);
    }

    #[test]
    fn hedging_is_unbiased_for_all_payoffs() {
        let e = simulate_gaarch(&GaarchParams::default(), 10, 20_000, 4).unwrap();
        for payoff in [
            ExoticPayoff::Straddle,
            ExoticPayoff::Binary,
            ExoticPayoff::GaussianWindow { delta: 0.3 },
        ] {
            let off = hedged_price(&e, &payoff, &HedgeConfig::disabled()).unwrap();
            let on = hedged_price(&e, &payoff, &HedgeConfig::default()).unwrap();
            let combined = (off.std_error.powi(2) + on.std_error.powi(2)).sqrt();
            assert!(
                (on.value - off.value).abs() < 3.0 * combined,
                "{payoff:?}: {} vs {} (combined se {combined})",
                on.value,
                off.value
            );
        }
    }

    #[test]
    fn sparse_rebalancing_stays_unbiased() {
        let e = simulate_gaussian(0.01, 20, 10_000, 5).unwrap();
        let cfg = HedgeConfig { rebalance_every: 5, ..Default::default() };
        let on = hedged_price(&e, &ExoticPayoff::Straddle, &cfg).unwrap();
        let off = hedged_price(&e, &ExoticPayoff::Straddle, &HedgeConfig::disabled()).unwrap();
        let combined = (off.std_error.powi(2) + on.std_error.powi(2)).sqrt();
        assert!((on.value - off.value).abs() < 3.0 * combined);
        assert!(on.variance_ratio < 1.0);
    }

    #[test]
    fn wrong_hedge_vol_still_unbiased() {
        let e = simulate_gaussian(0.01, 20, 10_000, 6).unwrap();
        let cfg = HedgeConfig { hedge_vol: Some(0.013), ..Default::default() };
        let on = hedged_price(&e, &ExoticPayoff::Straddle, &cfg).unwrap();
        let off = hedged_price(&e, &ExoticPayoff::Straddle, &HedgeConfig::disabled()).unwrap();
        let combined = (off.std_error.powi(2) + on.std_error.powi(2)).sqrt();
        assert!((on.value - off.value).abs() < 3.0 * combined);
        assert!(on.variance_ratio < 1.0, "ratio {}", on.variance_ratio);
    }

    #[test]
    fn price_estimate_is_deterministic() {
        let e = simulate_gaussian(0.01, 10, 5_000, 7).unwrap();
        let a = hedged_price(&e, &ExoticPayoff::Binary, &HedgeConfig::default()).unwrap();
        let b = hedged_price(&e, &ExoticPayoff::Binary, &HedgeConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gaussian_smile_is_flat() {
        let e = simulate_gaussian(0.01, 10, 30_000, 8).unwrap();
        let c = smile_via_exotics(&e, &KernelConfig::default(), &HedgeConfig::default()).unwrap();
        assert!((c.alpha - 1.0).abs() < 2.0 * c.alpha_se.unwrap().max(0.004), "alpha {}", c.alpha);
        assert!(c.beta.abs() < 2.5 * c.beta_se.unwrap(), "beta {}", c.beta);
        assert!(c.gamma.abs() < 2.5 * c.gamma_se.unwrap().max(0.004), "gamma {}", c.gamma);
        assert_eq!(c.method, Method::ExoticMc);
        assert_eq!(c.horizon_days, 10);
    }

    #[test]
    fn gaarch_high_vol_smile_sanity() {
        let e = simulate_gaarch(&GaarchParams::default(), 10, 40_000, 9).unwrap();
        let hi = e.filter_regime(Regime::HighVol).unwrap();
        let c = smile_via_exotics(&hi, &KernelConfig::default(), &HedgeConfig::default()).unwrap();
        assert!(c.beta < 0.0, "beta {}", c.beta);
        assert!(c.gamma > 0.0, "gamma {}", c.gamma);
    }

    #[test]
    fn smile_bootstrap_is_deterministic() {
        let e = simulate_gaussian(0.01, 5, 4_000, 10).unwrap();
        let a = smile_via_exotics(&e, &KernelConfig::default(), &HedgeConfig::default()).unwrap();
        let b = smile_via_exotics(&e, &KernelConfig::default(), &HedgeConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}
