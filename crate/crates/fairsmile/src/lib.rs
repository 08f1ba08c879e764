//! Fair volatility smiles from return distributions.
//!
//! The implied-vol smile at maturity T is summarized by three numbers,
//!
//! ```text
//! sigma_BS(M) = sigma (alpha + beta M + gamma M^2),
//! ```
//!
//! written in standardized moneyness M. Each coefficient is the Gaussian-model
//! price of one exotic payoff on the standardized T-day return u:
//!
//! * `alpha` — a straddle `|u|`, the overall vol level;
//! * `beta` — a binary `1(u > 0)`, the skew;
//! * `gamma` — a vanishing-width "no-move" option, the curvature.
//!
//! This crate estimates those coefficients straight from return samples or
//! path ensembles (with a delta-hedge control variate), compares them against
//! the Edgeworth cumulant expansion and against quadratic fits to Monte Carlo
//! implied vols, and feeds the whole pipeline from OHLC market data with
//! causal vol-regime conditioning.
//!
//! Start with [`models::simulate_gaarch`] or [`marketdata::parse_ohlc_csv`],
//! then [`smile::smile_from_samples`] or [`hedge::smile_via_exotics`]. The
//! `examples/` directory walks through every major capability.

pub mod bootstrap;
pub mod cli;
pub mod error;
pub mod hedge;
pub mod marketdata;
pub mod models;
pub mod moments;
pub mod pricing;
pub mod sample;
pub mod smile;

mod fit;
mod gauss;
mod rng;

pub use bootstrap::BootstrapConfig;
pub use error::{Error, Result};
pub use hedge::{gaussian_hedge_delta, hedged_price, smile_via_exotics, ExoticPayoff,
    HedgeConfig, PriceEstimate};
pub use marketdata::{parse_ohlc_csv, OhlcBar, OhlcSeries};
pub use models::{simulate_gaarch, simulate_gaussian, simulate_nonlinear_leverage, GaarchParams,
    NonlinearLeverageParams, PathEnsemble};
pub use moments::{compute_moments, MomentSummary};
pub use pricing::{bachelier_call, bachelier_implied_vol, black_scholes_call, fit_smile_quadratic,
    smile_from_paths, SmilePoint};
pub use sample::{Regime, SampleSet};
pub use smile::{alpha_hat, beta_hat, density_at_zero, edgeworth_coefficients, edgeworth_smile,
    gamma_hat, smile_from_samples, KernelConfig, Method, SmileCoefficients};
