//! Daily return path generators.
//!
//! Three models share one driver: a Gaussian baseline, a nonlinear-leverage
//! model where the volatility responds to a smoothed past return level
//!
//! ```text
//! sigma_t^2 = sigma_bar^2 [1 + 2 eps |xi_t + theta| 1_{xi_t + theta < 0}]
//! xi_{t+1}  = (1 - omega) xi_t + omega dW_t
//! ```
//!
//! with the SAME increment dW driving the return (that shared noise is the
//! leverage correlation), and an asymmetric GAARCH
//!
//! ```text
//! sigma_t   = sigma (1 + chi_t)
//! chi_{t+1} = rho chi_t + nu (1 + chi_t) [eta_t^2 1_{eta_t < 0} - 1/2]
//! ```
//!
//! Paths are generated in parallel but each path draws from its own
//! counter-derived RNG substream, so ensembles are bit-identical for any
//! thread count. Before the recorded window every path runs a state burn-in
//! and then a 60-day pre-window whose trailing EMA vol feeds the high/low
//! regime split, mirroring the empirical pipeline.

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::moments;
use crate::sample::{Regime, SampleSet};

/// Days of returns generated before the recorded window to estimate each
/// path's trailing vol (the pre-window used for the regime split).
const PRE_WINDOW_DAYS: usize = 60;

/// EMA window (days) for the pre-window vol, matching the market pipeline.
const EMA_WINDOW: usize = 20;

/// Simulated return paths: `n_paths` rows of `n_steps` per-step fractional
/// returns, plus the metadata needed to reproduce and regime-split them.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    returns: Vec<f64>, // row-major, n_paths * n_steps
    pub n_paths: usize,
    pub n_steps: usize,
    pub step_days: f64,
    pub model_tag: String,
    pub seed: u64,
    pub regime: Regime,
    /// Trailing EMA vol per path over the pre-window, if generated.
    pre_vol: Option<Vec<f64>>,
    /// Steps on which the GAARCH vol floor clipped a negative sigma.
    pub vol_floor_hits: u64,
}

impl PathEnsemble {
    /// Assemble from raw parts, validating the shape and finiteness.
    pub fn from_parts(
        returns: Vec<f64>,
        n_paths: usize,
        n_steps: usize,
        step_days: f64,
        model_tag: String,
        seed: u64,
    ) -> Result<Self> {
        if n_paths == 0 || n_steps == 0 {
            return Err(Error::invalid("ensemble must have at least one path and one step"));
        }
        if !(step_days > 0.0 && step_days.is_finite()) {
            return Err(Error::invalid("step_days must be positive"));
        }
        if returns.len() != n_paths * n_steps {
            return Err(Error::invalid(format!(
                "returns length {} does not match {} paths x {} steps",
                returns.len(),
                n_paths,
                n_steps
            )));
        }
        if returns.iter().any(|r| !r.is_finite()) {
            return Err(Error::invalid("all returns must be finite"));
        }
        Ok(PathEnsemble {
            returns,
            n_paths,
            n_steps,
            step_days,
            model_tag,
            seed,
            regime: Regime::All,
            pre_vol: None,
            vol_floor_hits: 0,
        })
    }

    pub fn path(&self, i: usize) -> &[f64] {
        &self.returns[i * self.n_steps..(i + 1) * self.n_steps]
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn pre_vol(&self) -> Option<&[f64]> {
        self.pre_vol.as_deref()
    }

    /// Horizon in days covered by the recorded window.
    pub fn horizon_days(&self) -> u32 {
        (self.n_steps as f64 * self.step_days).round() as u32
    }

    /// Per-path terminal returns r_T (sum of per-step returns).
    pub fn terminal_returns(&self) -> Vec<f64> {
        (0..self.n_paths).map(|i| self.path(i).iter().sum()).collect()
    }

    /// Standardized terminal sample, tagged with the ensemble's provenance.
    pub fn terminal_sample(&self) -> Result<SampleSet> {
        let raw = self.terminal_returns();
        Ok(crate::sample::standardize(&raw, self.horizon_days())?
            .with_regime(self.regime)
            .with_source(self.model_tag.clone()))
    }

    /// Same paths truncated to the first `horizon_days` of the window.
    /// Lets one long simulation serve every shorter horizon.
    pub fn prefix(&self, horizon_days: u32) -> Result<PathEnsemble> {
        let steps = (horizon_days as f64 / self.step_days).round() as usize;
        if steps == 0 || steps > self.n_steps {
            return Err(Error::invalid(format!(
                "prefix of {horizon_days} days needs 1..={} steps, got {steps}",
                self.n_steps
            )));
        }
        let mut returns = Vec::with_capacity(self.n_paths * steps);
        for i in 0..self.n_paths {
            returns.extend_from_slice(&self.path(i)[..steps]);
        }
        Ok(PathEnsemble {
            returns,
            n_paths: self.n_paths,
            n_steps: steps,
            step_days: self.step_days,
            model_tag: self.model_tag.clone(),
            seed: self.seed,
            regime: self.regime,
            pre_vol: self.pre_vol.clone(),
            vol_floor_hits: self.vol_floor_hits,
        })
    }

    /// Paths whose pre-window vol falls in the requested regime: high means
    /// strictly above the cross-path median, ties go low.
    pub fn filter_regime(&self, regime: Regime) -> Result<PathEnsemble> {
        if regime == Regime::All {
            return Ok(self.clone());
        }
        let pre = self.pre_vol.as_ref().ok_or_else(|| {
            Error::invalid("ensemble carries no pre-window vol; regenerate with a simulator")
        })?;
        let med = moments::median(pre)?;
        let keep: Vec<usize> = (0..self.n_paths)
            .filter(|&i| match regime {
                Regime::HighVol => pre[i] > med,
                Regime::LowVol => pre[i] <= med,
                Regime::All => unreachable!(),
            })
            .collect();
        if keep.len() < 2 {
            return Err(Error::InsufficientSamples { needed: 2, got: keep.len() });
        }
        let mut returns = Vec::with_capacity(keep.len() * self.n_steps);
        let mut pre_vol = Vec::with_capacity(keep.len());
        for &i in &keep {
            returns.extend_from_slice(self.path(i));
            pre_vol.push(pre[i]);
        }
        Ok(PathEnsemble {
            returns,
            n_paths: keep.len(),
            n_steps: self.n_steps,
            step_days: self.step_days,
            model_tag: self.model_tag.clone(),
            seed: self.seed,
            regime,
            pre_vol: Some(pre_vol),
            vol_floor_hits: self.vol_floor_hits,
        })
    }

    /// Binary dump: header (magic, version, shape, seed, metadata) then the
    /// row-major return matrix as little-endian f64.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(FORMAT_VERSION)?;
        w.write_u64::<LittleEndian>(self.n_paths as u64)?;
        w.write_u64::<LittleEndian>(self.n_steps as u64)?;
        w.write_f64::<LittleEndian>(self.step_days)?;
        w.write_u64::<LittleEndian>(self.seed)?;
        w.write_u64::<LittleEndian>(self.vol_floor_hits)?;
        w.write_u8(regime_code(self.regime))?;
        w.write_u8(self.pre_vol.is_some() as u8)?;
        let tag = self.model_tag.as_bytes();
        w.write_u32::<LittleEndian>(tag.len() as u32)?;
        w.write_all(tag)?;
        if let Some(pre) = &self.pre_vol {
            for &v in pre {
                w.write_f64::<LittleEndian>(v)?;
            }
        }
        for &r in &self.returns {
            w.write_f64::<LittleEndian>(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::invalid("not an ensemble file (bad magic)"));
        }
        let version = r.read_u32::<LittleEndian>()?;
        if version != FORMAT_VERSION {
            return Err(Error::invalid(format!("unsupported ensemble format version {version}")));
        }
        let n_paths = r.read_u64::<LittleEndian>()? as usize;
        let n_steps = r.read_u64::<LittleEndian>()? as usize;
        let step_days = r.read_f64::<LittleEndian>()?;
        let seed = r.read_u64::<LittleEndian>()?;
        let vol_floor_hits = r.read_u64::<LittleEndian>()?;
        let regime = decode_regime(r.read_u8()?)?;
        let has_pre = r.read_u8()? != 0;
        let tag_len = r.read_u32::<LittleEndian>()? as usize;
        if tag_len > 1 << 20 {
            return Err(Error::invalid("ensemble model tag implausibly long"));
        }
        let mut tag = vec![0u8; tag_len];
        r.read_exact(&mut tag)?;
        let model_tag = String::from_utf8(tag)
            .map_err(|_| Error::invalid("ensemble model tag is not UTF-8"))?;
        let pre_vol = if has_pre {
            let mut pre = Vec::with_capacity(n_paths);
            for _ in 0..n_paths {
                pre.push(r.read_f64::<LittleEndian>()?);
            }
            Some(pre)
        } else {
            None
        };
        let count = n_paths
            .checked_mul(n_steps)
            .ok_or_else(|| Error::invalid("ensemble dimensions overflow"))?;
        let mut returns = Vec::with_capacity(count);
        for _ in 0..count {
            returns.push(r.read_f64::<LittleEndian>()?);
        }
        let mut e =
            PathEnsemble::from_parts(returns, n_paths, n_steps, step_days, model_tag, seed)?;
        e.regime = regime;
        e.pre_vol = pre_vol;
        e.vol_floor_hits = vol_floor_hits;
        Ok(e)
    }

    /// CSV export, one row per path, columns step_1..step_n.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let header: Vec<String> = (1..=self.n_steps).map(|s| format!("step_{s}")).collect();
        w.write_record(&header)?;
        for i in 0..self.n_paths {
            let row: Vec<String> =
                self.path(i).iter().map(|r| format!("{r:.12e}")).collect();
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

const MAGIC: &[u8; 4] = b"FSML";
const FORMAT_VERSION: u32 = 1;

fn regime_code(r: Regime) -> u8 {
    match r {
        Regime::All => 0,
        Regime::HighVol => 1,
        Regime::LowVol => 2,
    }
}

fn decode_regime(code: u8) -> Result<Regime> {
    match code {
        0 => Ok(Regime::All),
        1 => Ok(Regime::HighVol),
        2 => Ok(Regime::LowVol),
        other => Err(Error::invalid(format!("unknown regime code {other}"))),
    }
}

/// Parameters of the nonlinear-leverage model.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NonlinearLeverageParams {
    /// sigma_bar, per sqrt(day).
    pub base_vol: f64,
    /// Leverage amplitude eps >= 0.
    pub epsilon: f64,
    /// Threshold theta (dimensionless, in units of xi).
    pub theta: f64,
    /// Memory rate omega per day; memory time ~ 1/omega.
    pub omega: f64,
}

impl Default for NonlinearLeverageParams {
    fn default() -> Self {
        NonlinearLeverageParams { base_vol: 0.01, epsilon: 0.1, theta: 0.0, omega: 0.1 }
    }
}

impl NonlinearLeverageParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.base_vol > 0.0 && self.base_vol.is_finite()) {
            return Err(Error::invalid("base_vol must be positive"));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid("epsilon must be >= 0"));
        }
        if !self.theta.is_finite() {
            return Err(Error::invalid("theta must be finite"));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::invalid("omega must be positive"));
        }
        Ok(())
    }
}

/// Parameters of the asymmetric GAARCH model.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GaarchParams {
    /// sigma, per sqrt(day).
    pub base_vol: f64,
    /// Persistence rho in [0, 1); memory time ~ 1/(1 - rho).
    pub rho: f64,
    /// Feedback amplitude nu >= 0.
    pub nu: f64,
}

impl Default for GaarchParams {
    fn default() -> Self {
        GaarchParams { base_vol: 0.01, rho: 0.9, nu: 0.1 }
    }
}

impl GaarchParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.base_vol > 0.0 && self.base_vol.is_finite()) {
            return Err(Error::invalid("base_vol must be positive"));
        }
        if !(self.rho >= 0.0 && self.rho < 1.0) {
            return Err(Error::invalid("rho must be in [0, 1)"));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::invalid("nu must be >= 0"));
        }
        Ok(())
    }
}

/// Instantaneous variance of the nonlinear-leverage model at state xi.
pub fn nonlinear_instant_variance(xi: f64, p: &NonlinearLeverageParams) -> f64 {
    let shifted = xi + p.theta;
    let leverage = if shifted < 0.0 { shifted.abs() } else { 0.0 };
    p.base_vol * p.base_vol * (1.0 + 2.0 * p.epsilon * leverage)
}

/// One update of the GAARCH vol state chi given the return shock eta.
pub fn gaarch_chi_step(chi: f64, eta: f64, p: &GaarchParams) -> f64 {
    let down = if eta < 0.0 { eta * eta } else { 0.0 };
    p.rho * chi + p.nu * (1.0 + chi) * (down - 0.5)
}

/// Constant-vol Gaussian baseline: i.i.d. N(0, vol^2) daily returns.
pub fn simulate_gaussian(
    vol: f64,
    horizon_days: u32,
    n_paths: usize,
    seed: u64,
) -> Result<PathEnsemble> {
    if !(vol > 0.0 && vol.is_finite()) {
        return Err(Error::invalid("vol must be positive"));
    }
    check_shape(horizon_days, n_paths)?;
    generate(
        n_paths,
        horizon_days as usize,
        seed,
        0,
        format!("gaussian(vol={vol})"),
        || (),
        move |_state: &mut (), z| StepOut { ret: vol * z, floored: false },
    )
}

/// Nonlinear-leverage model, explicit Euler at one step per day.
pub fn simulate_nonlinear_leverage(
    p: &NonlinearLeverageParams,
    horizon_days: u32,
    n_paths: usize,
    seed: u64,
) -> Result<PathEnsemble> {
    p.validate()?;
    check_shape(horizon_days, n_paths)?;
    let dt = 1.0;
    if p.omega * dt >= 1.0 {
        return Err(Error::UnstableDiscretization { omega_dt: p.omega * dt });
    }
    // xi relaxes on time 1/omega; ten times that flushes the xi_0 = 0 start.
    let burn_in = (10.0 / p.omega).ceil() as usize;
    let p = *p;
    generate(
        n_paths,
        horizon_days as usize,
        seed,
        burn_in,
        format!(
            "nonlinear(vol={},eps={},theta={},omega={})",
            p.base_vol, p.epsilon, p.theta, p.omega
        ),
        || 0.0f64,
        move |xi: &mut f64, z| {
            let sigma = nonlinear_instant_variance(*xi, &p).sqrt();
            let ret = sigma * z;
            *xi = (1.0 - p.omega) * *xi + p.omega * z;
            StepOut { ret, floored: false }
        },
    )
}

/// Asymmetric GAARCH model; sigma is floored at zero (chi below -1 can occur
/// at large nu) and each clipped step is counted in `vol_floor_hits`.
pub fn simulate_gaarch(
    p: &GaarchParams,
    horizon_days: u32,
    n_paths: usize,
    seed: u64,
) -> Result<PathEnsemble> {
    p.validate()?;
    check_shape(horizon_days, n_paths)?;
    // chi relaxes on time 1/(1 - rho).
    let burn_in = (10.0 / (1.0 - p.rho)).ceil() as usize;
    let p = *p;
    generate(
        n_paths,
        horizon_days as usize,
        seed,
        burn_in,
        format!("gaarch(vol={},rho={},nu={})", p.base_vol, p.rho, p.nu),
        || 0.0f64,
        move |chi: &mut f64, z| {
            let sigma_raw = p.base_vol * (1.0 + *chi);
            let sigma = sigma_raw.max(0.0);
            let ret = sigma * z;
            *chi = gaarch_chi_step(*chi, z, &p);
            StepOut { ret, floored: sigma_raw < 0.0 }
        },
    )
}

fn check_shape(horizon_days: u32, n_paths: usize) -> Result<()> {
    if horizon_days == 0 {
        return Err(Error::invalid("horizon_days must be at least 1"));
    }
    if n_paths == 0 {
        return Err(Error::invalid("n_paths must be at least 1"));
    }
    Ok(())
}

struct StepOut {
    ret: f64,
    floored: bool,
}

/// Shared driver: burn in the state, run the pre-window (feeding the trailing
/// vol estimate), then record `n_steps` returns. One RNG substream per path.
fn generate<St, I, F>(
    n_paths: usize,
    n_steps: usize,
    seed: u64,
    burn_in: usize,
    model_tag: String,
    init: I,
    step: F,
) -> Result<PathEnsemble>
where
    St: Send,
    I: Fn() -> St + Sync,
    F: Fn(&mut St, f64) -> StepOut + Sync,
{
    struct PathOut {
        returns: Vec<f64>,
        pre_vol: f64,
        floor_hits: u64,
    }

    let paths: Vec<PathOut> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = crate::rng::substream(seed, i as u64);
            let mut state = init();
            let mut floor_hits = 0u64;
            for _ in 0..burn_in {
                let z: f64 = rng.sample(StandardNormal);
                step(&mut state, z);
            }
            let mut sq = [0.0f64; PRE_WINDOW_DAYS];
            for slot in sq.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                let out = step(&mut state, z);
                floor_hits += out.floored as u64;
                *slot = out.ret * out.ret;
            }
            let pre_var = crate::marketdata::ema_states(&sq, EMA_WINDOW)
                .map(|states| *states.last().unwrap())
                .unwrap_or(0.0);
            let mut returns = Vec::with_capacity(n_steps);
            for _ in 0..n_steps {
                let z: f64 = rng.sample(StandardNormal);
                let out = step(&mut state, z);
                floor_hits += out.floored as u64;
                returns.push(out.ret);
            }
            PathOut { returns, pre_vol: pre_var.max(0.0).sqrt(), floor_hits }
        })
        .collect();

    let mut returns = Vec::with_capacity(n_paths * n_steps);
    let mut pre_vol = Vec::with_capacity(n_paths);
    let mut vol_floor_hits = 0u64;
    for p in paths {
        returns.extend_from_slice(&p.returns);
        pre_vol.push(p.pre_vol);
        vol_floor_hits += p.floor_hits;
    }
    let mut e = PathEnsemble::from_parts(returns, n_paths, n_steps, 1.0, model_tag, seed)?;
    e.pre_vol = Some(pre_vol);
    e.vol_floor_hits = vol_floor_hits;
    Ok(e)
}
