//! Vanilla pricing, implied vols, and the smile read off simulated paths.
//!
//! Both pricing models here carry zero rates: returns are the object under
//! study, not discounting. Bachelier (arithmetic) is the native model for
//! standardized returns; Black-Scholes is provided for cross-checks and for
//! quoting against lognormal conventions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::{norm_cdf, norm_pdf};
use crate::hedge::{estimator_matrix, DeltaFn, HedgeConfig, PayoffFn};
use crate::models::PathEnsemble;
use crate::sample::mean_std;
use crate::smile::{Method, SmileCoefficients};

/// Moneyness grid used by the CLI and examples when none is given.
pub const DEFAULT_MONEYNESS_GRID: [f64; 7] = [-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0];

const MAX_MONEYNESS: f64 = 1.5;
const PRICE_TOL: f64 = 1e-10;
const MAX_ITER: usize = 100;

fn check_vol_t(vol: f64, t: f64) -> Result<()> {
    if !(vol > 0.0 && vol.is_finite()) {
        return Err(Error::invalid(format!("vol must be positive, got {vol}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("maturity must be positive, got {t}")));
    }
    Ok(())
}

/// Bachelier call: (s0 - K) Phi(d) + vol sqrt(t) phi(d), d = (s0 - K)/(vol sqrt(t)).
///
/// `vol_abs` is in price units per sqrt(time unit of `t`).
pub fn bachelier_call(s0: f64, strike: f64, vol_abs: f64, t: f64) -> Result<f64> {
    check_vol_t(vol_abs, t)?;
    let sd = vol_abs * t.sqrt();
    let d = (s0 - strike) / sd;
    Ok((s0 - strike) * norm_cdf(d) + sd * norm_pdf(d))
}

/// d(price)/d(vol_abs) for the Bachelier call; strictly positive.
pub fn bachelier_vega(s0: f64, strike: f64, vol_abs: f64, t: f64) -> Result<f64> {
    check_vol_t(vol_abs, t)?;
    let d = (s0 - strike) / (vol_abs * t.sqrt());
    Ok(t.sqrt() * norm_pdf(d))
}

/// Black-Scholes call with zero rates: s0 Phi(d1) - K Phi(d2).
pub fn black_scholes_call(s0: f64, strike: f64, vol: f64, t: f64) -> Result<f64> {
    check_vol_t(vol, t)?;
    if !(s0 > 0.0 && strike > 0.0) {
        return Err(Error::invalid(format!(
            "spot and strike must be positive, got s0={s0} strike={strike}"
        )));
    }
    let sd = vol * t.sqrt();
    let d1 = ((s0 / strike).ln() + 0.5 * sd * sd) / sd;
    Ok(s0 * norm_cdf(d1) - strike * norm_cdf(d1 - sd))
}

/// Monotone root solve shared by the implied-vol routines: Newton on the vol,
/// falling back to bisection whenever the Newton step leaves the bracket.
fn invert_increasing<F>(target: f64, mut hi: f64, price_and_vega: F) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    // Price is strictly increasing in vol, so grow the bracket until it
    // straddles the target.
    let mut expansions = 0;
    while price_and_vega(hi).0 < target {
        hi *= 2.0;
        expansions += 1;
        if expansions > 200 {
            return Err(Error::ImpliedVolDidNotConverge {
                residual: price_and_vega(hi).0 - target,
            });
        }
    }
    let mut lo = 0.0f64;
    let mut x = 0.5 * hi;
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let (p, vega) = price_and_vega(x);
        residual = p - target;
        if residual.abs() < PRICE_TOL {
            return Ok(x);
        }
        if residual < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - residual / vega;
        x = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(Error::ImpliedVolDidNotConverge { residual })
}

/// Invert the Bachelier call for `vol_abs`. The price must lie strictly above
/// intrinsic; there is no upper arbitrage bound.
pub fn bachelier_implied_vol(price: f64, s0: f64, strike: f64, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("maturity must be positive, got {t}")));
    }
    let intrinsic = (s0 - strike).max(0.0);
    if !(price > intrinsic && price.is_finite()) {
        return Err(Error::NoArbitrageViolation { price, lower: intrinsic, upper: f64::INFINITY });
    }
    // Exact at the money, a workable starting scale elsewhere.
    let extrinsic = price - intrinsic;
    let hi = (2.0 * extrinsic * crate::gauss::SQRT_2PI / t.sqrt()).max(1e-12);
    invert_increasing(price, hi, |vol| {
        let sd = vol * t.sqrt();
        let d = (s0 - strike) / sd;
        ((s0 - strike) * norm_cdf(d) + sd * norm_pdf(d), t.sqrt() * norm_pdf(d))
    })
}

/// Invert the Black-Scholes call. Arbitrage bounds: intrinsic < price < s0.
pub fn black_scholes_implied_vol(price: f64, s0: f64, strike: f64, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("maturity must be positive, got {t}")));
    }
    if !(s0 > 0.0 && strike > 0.0) {
        return Err(Error::invalid(format!(
            "spot and strike must be positive, got s0={s0} strike={strike}"
        )));
    }
    let intrinsic = (s0 - strike).max(0.0);
    if !(price > intrinsic && price < s0) {
        return Err(Error::NoArbitrageViolation { price, lower: intrinsic, upper: s0 });
    }
    invert_increasing(price, 1.0, |vol| {
        let sd = vol * t.sqrt();
        let d1 = ((s0 / strike).ln() + 0.5 * sd * sd) / sd;
        (
            s0 * norm_cdf(d1) - strike * norm_cdf(d1 - sd),
            s0 * t.sqrt() * norm_pdf(d1),
        )
    })
}

/// One strike on a Monte Carlo smile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmilePoint {
    /// Standardized moneyness M = (K - S0) / (S0 sigma sqrt(T)).
    pub moneyness: f64,
    /// Bachelier implied vol per sqrt(day), relative to S0 = 1.
    pub implied_vol: f64,
    /// Call price in units of S0 = 1.
    pub price: f64,
    pub price_se: f64,
}

/// Price calls at each moneyness on the ensemble (hedged Monte Carlo) and
/// invert to Bachelier implied vols.
///
/// Strikes are K = 1 + M sigma_T with sigma_T the realized terminal std, so a
/// Gaussian ensemble gives a flat smile at the simulation vol.
pub fn smile_from_paths(
    e: &PathEnsemble,
    moneyness_grid: &[f64],
    h: &HedgeConfig,
) -> Result<Vec<SmilePoint>> {
    if moneyness_grid.is_empty() {
        return Err(Error::invalid("moneyness grid must not be empty"));
    }
    for &m in moneyness_grid {
        if !m.is_finite() || m.abs() > MAX_MONEYNESS {
            return Err(Error::invalid(format!(
                "moneyness must lie in [-{MAX_MONEYNESS}, {MAX_MONEYNESS}], got {m}"
            )));
        }
    }
    let t_days = e.horizon_days() as f64;
    if t_days <= 0.0 {
        return Err(Error::invalid("ensemble horizon must be at least one day"));
    }
    let (_, std_t) = mean_std(&e.terminal_returns());
    if !(std_t > 0.0) {
        return Err(Error::DegenerateSample);
    }

    // Calls on the standardized terminal return, hedged with their own
    // Bachelier delta Phi((x - M)/sqrt(v)).
    let pairs: Vec<(PayoffFn<'_>, DeltaFn<'_>)> = moneyness_grid
        .iter()
        .map(|&m| {
            (
                Box::new(move |u: f64| (u - m).max(0.0)) as PayoffFn<'_>,
                Box::new(move |x: f64, v: f64| norm_cdf((x - m) / v.sqrt())) as DeltaFn<'_>,
            )
        })
        .collect();
    let rows = estimator_matrix(e, &pairs, h)?;

    let sqrt_n = (e.n_paths as f64).sqrt();
    let sqrt_td = t_days.sqrt();
    moneyness_grid
        .iter()
        .zip(rows)
        .map(|(&m, row)| {
            let (mean_u, sd_u) = mean_std(&row);
            let price = std_t * mean_u;
            let price_se = std_t * sd_u / sqrt_n;
            let strike = 1.0 + m * std_t;
            let iv_horizon = bachelier_implied_vol(price, 1.0, strike, 1.0)?;
            Ok(SmilePoint { moneyness: m, implied_vol: iv_horizon / sqrt_td, price, price_se })
        })
        .collect()
}

/// Weighted quadratic fit of implied vol / base vol on (1, M, M^2).
///
/// Weights are inverse variances of the implied vols, propagated from the
/// price errors through vega; if any point lacks an error bar the fit is
/// unweighted and no coefficient errors are reported.
pub fn fit_smile_quadratic(
    points: &[SmilePoint],
    base_vol: f64,
    horizon_days: u32,
) -> Result<SmileCoefficients> {
    if points.len() < 4 {
        return Err(Error::InsufficientSamples { needed: 4, got: points.len() });
    }
    if !(base_vol > 0.0 && base_vol.is_finite()) {
        return Err(Error::invalid(format!("base vol must be positive, got {base_vol}")));
    }
    if horizon_days == 0 {
        return Err(Error::invalid("horizon must be at least one day"));
    }
    for p in points {
        if !(p.implied_vol > 0.0 && p.implied_vol.is_finite() && p.moneyness.is_finite()) {
            return Err(Error::invalid(format!(
                "bad smile point at M={}: implied vol {}",
                p.moneyness, p.implied_vol
            )));
        }
    }
    let lo = points.iter().map(|p| p.moneyness).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.moneyness).fold(f64::NEG_INFINITY, f64::max);
    if !(lo <= 0.0 && hi >= 0.0) {
        return Err(Error::invalid("moneyness grid must span zero"));
    }

    let ms: Vec<f64> = points.iter().map(|p| p.moneyness).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.implied_vol / base_vol).collect();
    let sqrt_td = (horizon_days as f64).sqrt();
    let weighted = points.iter().all(|p| p.price_se > 0.0 && p.price_se.is_finite());
    let ws: Vec<f64> = if weighted {
        points
            .iter()
            .map(|p| {
                // d = (s0 - K)/(iv sqrt(T)) with K - s0 = M base_vol sqrt(T).
                let d = -(p.moneyness * base_vol) / p.implied_vol;
                let vega_per_day_vol = norm_pdf(d) * sqrt_td;
                let se_y = p.price_se / (vega_per_day_vol * base_vol);
                1.0 / (se_y * se_y)
            })
            .collect()
    } else {
        vec![1.0; points.len()]
    };

    let fit = crate::fit::polyfit_weighted(&ms, &ys, &ws, 2)?;
    Ok(SmileCoefficients {
        alpha: fit.coeffs[0],
        beta: fit.coeffs[1],
        gamma: fit.coeffs[2],
        alpha_se: weighted.then(|| fit.standard_errors[0]),
        beta_se: weighted.then(|| fit.standard_errors[1]),
        gamma_se: weighted.then(|| fit.standard_errors[2]),
        horizon_days,
        method: Method::IvFit,
    })
}
