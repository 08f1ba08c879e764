//! Command-line driver: simulate ensembles, estimate smiles, compare against
//! the Edgeworth expansion, ingest OHLC data, and join results into report
//! tables.
//!
//! Data goes to stdout unless `--output` is given; progress and warnings go
//! to stderr. Every command is deterministic: the same arguments, config and
//! `--seed` produce byte-identical output regardless of `--threads`.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bootstrap::BootstrapConfig;
use crate::error::{Error, Result};
use crate::hedge::{smile_via_exotics_boot, HedgeConfig};
use crate::marketdata::{build_return_windows, parse_ohlc_csv, read_sample_csv,
    sample_sidecar_path, write_sample_csv};
use crate::models::{simulate_gaarch, simulate_gaussian, simulate_nonlinear_leverage,
    GaarchParams, NonlinearLeverageParams, PathEnsemble};
use crate::moments::{compute_moments, MomentSummary};
use crate::pricing::{fit_smile_quadratic, smile_from_paths, DEFAULT_MONEYNESS_GRID};
use crate::sample::{mean_std, Regime};
use crate::smile::{edgeworth_coefficients, smile_from_samples, KernelConfig,
    SmileCoefficients};

const UNITS_HELP: &str = "\
Units: returns are relative price changes over the stated horizon; vols are \
per sqrt(day); alpha, beta, gamma are dimensionless multiples of the base \
vol; moneyness M is in units of sigma sqrt(T); skew_over_6 and kurt_over_24 \
are the Edgeworth reference values S/6 and kappa/24.";

/// Entry point for the binary; returns the process exit code
/// (0 success, 1 runtime failure, 2 usage error).
pub fn main() -> i32 {
    let _ = env_logger::Builder::from_env(
        env_logger::Env::default().default_filter_or("warn"),
    )
    .format_timestamp(None)
    .try_init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(Error::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "fairsmile",
    version,
    about = "Fair volatility smiles from return distributions",
    after_help = UNITS_HELP
)]
struct Cli {
    /// Base RNG seed; all random streams derive from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (wall time only; results never depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write primary output here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Output table format.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// TOML or JSON config file; keys mirror flag names, flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a path ensemble into a binary file (or CSV export).
    Simulate(SimulateArgs),
    /// Smile coefficients from an ensemble or sample file, per method.
    Estimate(EstimateArgs),
    /// Moment summary and Edgeworth smile from an ensemble or sample file.
    Edgeworth(EdgeworthArgs),
    /// Split an OHLC CSV into per-regime standardized return samples.
    Ingest(IngestArgs),
    /// Join estimate tables into one long-format comparison table.
    Report(ReportArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ModelKind {
    Gaussian,
    /// Nonlinear leverage feedback.
    Nonlinear,
    Gaarch,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum MethodArg {
    #[value(name = "exotic_mc")]
    ExoticMc,
    #[value(name = "iv_fit")]
    IvFit,
    Edgeworth,
    All,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RegimeArg {
    All,
    #[value(alias = "high_vol")]
    High,
    #[value(alias = "low_vol")]
    Low,
}

impl RegimeArg {
    fn to_regime(self) -> Regime {
        match self {
            RegimeArg::All => Regime::All,
            RegimeArg::High => Regime::HighVol,
            RegimeArg::Low => Regime::LowVol,
        }
    }
}

#[derive(Args, Debug, Default, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
struct SimulateArgs {
    /// Return model to simulate.
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    /// Base daily vol (default 0.01).
    #[arg(long)]
    vol: Option<f64>,
    /// Leverage strength epsilon (nonlinear model, default 0.1).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Leverage offset theta (nonlinear model, default 0).
    #[arg(long)]
    theta: Option<f64>,
    /// Feedback memory omega (nonlinear model, default 0.1).
    #[arg(long)]
    omega: Option<f64>,
    /// Vol autocorrelation rho (gaarch, default 0.9).
    #[arg(long)]
    rho: Option<f64>,
    /// Shock feedback nu (gaarch, default 0.1).
    #[arg(long)]
    nu: Option<f64>,
    /// Number of paths (default 10000).
    #[arg(long)]
    paths: Option<usize>,
    /// Horizon in days, one step per day (default 20).
    #[arg(long)]
    horizon: Option<u32>,
    /// Export as CSV instead of the binary ensemble format.
    #[arg(long)]
    csv: bool,
}

impl SimulateArgs {
    fn merged(self, file: Option<Self>) -> Self {
        let f = file.unwrap_or_default();
        SimulateArgs {
            model: self.model.or(f.model),
            vol: self.vol.or(f.vol),
            epsilon: self.epsilon.or(f.epsilon),
            theta: self.theta.or(f.theta),
            omega: self.omega.or(f.omega),
            rho: self.rho.or(f.rho),
            nu: self.nu.or(f.nu),
            paths: self.paths.or(f.paths),
            horizon: self.horizon.or(f.horizon),
            csv: self.csv || f.csv,
        }
    }
}

#[derive(Args, Debug, Default, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
struct EstimateArgs {
    /// Ensemble binary or sample CSV (with its .meta.json sidecar).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Estimation method (default all that apply to the input).
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Horizons in days: comma list and/or a..b ranges, e.g. "1..5,10,20".
    /// Ensembles only; defaults to the full simulated horizon.
    #[arg(long)]
    horizons: Option<String>,
    /// Pre-window vol regime to condition on (ensembles carrying pre-vol).
    #[arg(long, value_enum)]
    regime: Option<RegimeArg>,
    /// Kernel widths for the curvature, strictly decreasing comma list.
    #[arg(long)]
    delta_grid: Option<String>,
    /// Order in delta of the bandwidth extrapolation (even, default 2).
    #[arg(long)]
    extrap_order: Option<usize>,
    /// Disable the delta-hedge control variate.
    #[arg(long)]
    no_hedge: bool,
    /// Hedge vol per sqrt(day) (default: realized terminal std).
    #[arg(long)]
    hedge_vol: Option<f64>,
    /// Rebalance the hedge every this many steps (default 1).
    #[arg(long)]
    rebalance_every: Option<usize>,
    /// Bootstrap resamples for standard errors (default 200, min 100).
    #[arg(long)]
    n_boot: Option<usize>,
    /// Bootstrap block length (samples; default: window length if overlapping).
    #[arg(long)]
    block_len: Option<usize>,
    /// Moneyness grid for the implied-vol fit, comma list spanning 0.
    #[arg(long)]
    moneyness_grid: Option<String>,
}

impl EstimateArgs {
    fn merged(self, file: Option<Self>) -> Self {
        let f = file.unwrap_or_default();
        EstimateArgs {
            input: self.input.or(f.input),
            method: self.method.or(f.method),
            horizons: self.horizons.or(f.horizons),
            regime: self.regime.or(f.regime),
            delta_grid: self.delta_grid.or(f.delta_grid),
            extrap_order: self.extrap_order.or(f.extrap_order),
            no_hedge: self.no_hedge || f.no_hedge,
            hedge_vol: self.hedge_vol.or(f.hedge_vol),
            rebalance_every: self.rebalance_every.or(f.rebalance_every),
            n_boot: self.n_boot.or(f.n_boot),
            block_len: self.block_len.or(f.block_len),
            moneyness_grid: self.moneyness_grid.or(f.moneyness_grid),
        }
    }
}

#[derive(Args, Debug, Default, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
struct EdgeworthArgs {
    /// Ensemble binary or sample CSV.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Horizons in days (ensembles only), as for estimate.
    #[arg(long)]
    horizons: Option<String>,
    /// Pre-window vol regime to condition on.
    #[arg(long, value_enum)]
    regime: Option<RegimeArg>,
}

impl EdgeworthArgs {
    fn merged(self, file: Option<Self>) -> Self {
        let f = file.unwrap_or_default();
        EdgeworthArgs {
            input: self.input.or(f.input),
            horizons: self.horizons.or(f.horizons),
            regime: self.regime.or(f.regime),
        }
    }
}

#[derive(Args, Debug, Default, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
struct IngestArgs {
    /// OHLC CSV with header date,open,high,low,close.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Return-window length in days (default 20).
    #[arg(long)]
    horizon: Option<u32>,
    /// Directory for the sample files (default: current directory).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl IngestArgs {
    fn merged(self, file: Option<Self>) -> Self {
        let f = file.unwrap_or_default();
        IngestArgs {
            input: self.input.or(f.input),
            horizon: self.horizon.or(f.horizon),
            out_dir: self.out_dir.or(f.out_dir),
        }
    }
}

#[derive(Args, Debug, Default, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
struct ReportArgs {
    /// Estimate tables (CSV) to join, in output order.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    inputs: Vec<PathBuf>,
}

impl ReportArgs {
    fn merged(self, file: Option<Self>) -> Self {
        let f = file.unwrap_or_default();
        ReportArgs { inputs: if self.inputs.is_empty() { f.inputs } else { self.inputs } }
    }
}

/// Config-file mirror of the command line; section and key names match the
/// subcommands and flags.
#[derive(Deserialize, Debug, Default)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    threads: Option<usize>,
    output: Option<PathBuf>,
    format: Option<OutputFormat>,
    simulate: Option<SimulateArgs>,
    estimate: Option<EstimateArgs>,
    edgeworth: Option<EdgeworthArgs>,
    ingest: Option<IngestArgs>,
    report: Option<ReportArgs>,
}

fn load_file_config(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    let is_json = path.extension().map(|x| x.eq_ignore_ascii_case("json")).unwrap_or(false);
    if is_json {
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("bad JSON config {}: {e}", path.display())))
    } else {
        toml::from_str(&text)
            .map_err(|e| Error::Config(format!("bad TOML config {}: {e}", path.display())))
    }
}

struct Globals {
    seed: u64,
    format: OutputFormat,
    output: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => load_file_config(p)?,
        None => FileConfig::default(),
    };
    if let Some(n) = cli.threads.or(file.threads) {
        // Results are thread-count independent; ignore "already built" from
        // repeated initialization in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let g = Globals {
        seed: cli.seed.or(file.seed).unwrap_or(0),
        format: cli.format.or(file.format).unwrap_or_default(),
        output: cli.output.or(file.output),
    };
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&g, a.merged(file.simulate)),
        Command::Estimate(a) => cmd_estimate(&g, a.merged(file.estimate)),
        Command::Edgeworth(a) => cmd_edgeworth(&g, a.merged(file.edgeworth)),
        Command::Ingest(a) => cmd_ingest(&g, a.merged(file.ingest)),
        Command::Report(a) => cmd_report(&g, a.merged(file.report)),
    }
}

// ---------------------------------------------------------------- simulate

fn cmd_simulate(g: &Globals, a: SimulateArgs) -> Result<()> {
    let model = a.model.ok_or_else(|| Error::Usage("simulate requires --model".into()))?;
    let out = g.output.clone().ok_or_else(|| {
        Error::Usage("simulate requires --output (ensembles are files, not stdout)".into())
    })?;
    let vol = a.vol.unwrap_or(0.01);
    let paths = a.paths.unwrap_or(10_000);
    let horizon = a.horizon.unwrap_or(20);
    let e = match model {
        ModelKind::Gaussian => simulate_gaussian(vol, horizon, paths, g.seed)?,
        ModelKind::Nonlinear => {
            let p = NonlinearLeverageParams {
                base_vol: vol,
                epsilon: a.epsilon.unwrap_or(0.1),
                theta: a.theta.unwrap_or(0.0),
                omega: a.omega.unwrap_or(0.1),
            };
            simulate_nonlinear_leverage(&p, horizon, paths, g.seed)?
        }
        ModelKind::Gaarch => {
            let p = GaarchParams {
                base_vol: vol,
                rho: a.rho.unwrap_or(0.9),
                nu: a.nu.unwrap_or(0.1),
            };
            simulate_gaarch(&p, horizon, paths, g.seed)?
        }
    };
    if a.csv {
        e.write_csv(&out)?;
    } else {
        e.write_binary(&out)?;
    }
    log::info!(
        "wrote {} x {}-day {} ensemble (seed {}) to {}",
        e.n_paths,
        e.horizon_days(),
        e.model_tag,
        e.seed,
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------- estimate

/// One output row of `estimate`: a smile per horizon, regime and method,
/// with the Edgeworth reference values alongside.
#[derive(Debug, Serialize, Deserialize)]
pub struct EstimateRow {
    pub horizon_days: u32,
    pub regime: String,
    pub method: String,
    pub n: usize,
    pub alpha: f64,
    pub alpha_se: Option<f64>,
    pub beta: f64,
    pub beta_se: Option<f64>,
    pub gamma: f64,
    pub gamma_se: Option<f64>,
    pub skew_over_6: f64,
    pub kurt_over_24: f64,
}

fn coeff_row(c: &SmileCoefficients, m: &MomentSummary, regime: Regime, n: usize) -> EstimateRow {
    EstimateRow {
        horizon_days: c.horizon_days,
        regime: regime.to_string(),
        method: c.method.to_string(),
        n,
        alpha: c.alpha,
        alpha_se: c.alpha_se,
        beta: c.beta,
        beta_se: c.beta_se,
        gamma: c.gamma,
        gamma_se: c.gamma_se,
        skew_over_6: m.skewness / 6.0,
        kurt_over_24: m.excess_kurtosis / 24.0,
    }
}

fn looks_like_ensemble(path: &Path) -> Result<bool> {
    use std::io::Read;
    let mut f = std::fs::File::open(path)
        .map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
    let mut magic = [0u8; 4];
    Ok(f.read_exact(&mut magic).is_ok() && &magic == b"FSML")
}

fn kernel_for(a: &EstimateArgs, n_samples: usize) -> Result<KernelConfig> {
    let mut k = match &a.delta_grid {
        Some(spec) => KernelConfig {
            delta_grid: parse_f64_list(spec, "delta-grid")?,
            ..KernelConfig::default()
        },
        None => KernelConfig::default_for_sample_size(n_samples),
    };
    if let Some(order) = a.extrap_order {
        k.extrapolation_order = order;
    }
    k.validate()?;
    Ok(k)
}

fn hedge_for(a: &EstimateArgs) -> HedgeConfig {
    HedgeConfig {
        enabled: !a.no_hedge,
        hedge_vol: a.hedge_vol,
        rebalance_every: a.rebalance_every.unwrap_or(1),
    }
}

fn methods_for(a: &EstimateArgs, is_ensemble: bool) -> Result<Vec<MethodArg>> {
    Ok(match a.method.unwrap_or(MethodArg::All) {
        MethodArg::All if is_ensemble => {
            vec![MethodArg::ExoticMc, MethodArg::IvFit, MethodArg::Edgeworth]
        }
        MethodArg::All => vec![MethodArg::ExoticMc, MethodArg::Edgeworth],
        MethodArg::IvFit if !is_ensemble => {
            return Err(Error::invalid(
                "iv_fit prices paths, so it needs an ensemble input, not a sample file",
            ));
        }
        m => vec![m],
    })
}

fn cmd_estimate(g: &Globals, a: EstimateArgs) -> Result<()> {
    let input =
        a.input.clone().ok_or_else(|| Error::Usage("estimate requires --input".into()))?;
    let rows = if looks_like_ensemble(&input)? {
        estimate_ensemble(g, &a, &input)?
    } else {
        estimate_sample(g, &a, &input)?
    };
    write_rows(g, &rows)
}

fn estimate_ensemble(g: &Globals, a: &EstimateArgs, input: &Path) -> Result<Vec<EstimateRow>> {
    let methods = methods_for(a, true)?;
    let full = PathEnsemble::read_binary(input)?;
    let regime = a.regime.map(RegimeArg::to_regime).unwrap_or(Regime::All);
    let full = full.filter_regime(regime)?;
    let horizons = match &a.horizons {
        Some(spec) => parse_horizons(spec)?,
        None => vec![full.horizon_days()],
    };
    let n_boot = a.n_boot.unwrap_or(200);
    let hedge = hedge_for(a);
    let grid = match &a.moneyness_grid {
        Some(spec) => parse_f64_list(spec, "moneyness-grid")?,
        None => DEFAULT_MONEYNESS_GRID.to_vec(),
    };

    let mut rows = Vec::new();
    for &t in &horizons {
        let sub = full.prefix(t)?;
        let sample = sub.terminal_sample()?;
        let m = compute_moments(&sample)?;
        let kernel = kernel_for(a, sub.n_paths)?;
        log::info!("estimating T={t} regime={regime} on {} paths", sub.n_paths);
        for method in &methods {
            let c = match method {
                MethodArg::ExoticMc => {
                    smile_via_exotics_boot(&sub, &kernel, &hedge, n_boot, g.seed ^ 0xB007_5EED)?
                }
                MethodArg::IvFit => {
                    let points = smile_from_paths(&sub, &grid, &hedge)?;
                    let (_, std_t) = mean_std(&sub.terminal_returns());
                    let per_day = std_t / (t as f64).sqrt();
                    fit_smile_quadratic(&points, per_day, t)?
                }
                MethodArg::Edgeworth => edgeworth_coefficients(&m, t),
                MethodArg::All => unreachable!("expanded above"),
            };
            rows.push(coeff_row(&c, &m, regime, sub.n_paths));
        }
    }
    Ok(rows)
}

fn estimate_sample(g: &Globals, a: &EstimateArgs, input: &Path) -> Result<Vec<EstimateRow>> {
    let methods = methods_for(a, false)?;
    if a.horizons.is_some() {
        return Err(Error::Usage(
            "--horizons applies to ensembles; a sample file fixes its own horizon".into(),
        ));
    }
    let s = read_sample_csv(input)?;
    if let Some(r) = a.regime {
        if r.to_regime() != s.regime {
            return Err(Error::invalid(format!(
                "sample file is for regime {}, but --regime {} was requested",
                s.regime,
                r.to_regime()
            )));
        }
    }
    let m = compute_moments(&s)?;
    let boot = BootstrapConfig {
        n_boot: a.n_boot.unwrap_or(200),
        seed: g.seed,
        block_len: a.block_len,
    };
    let mut rows = Vec::new();
    for method in &methods {
        let c = match method {
            MethodArg::ExoticMc => {
                let kernel = kernel_for(a, s.len())?;
                smile_from_samples(&s, &kernel, &boot)?
            }
            MethodArg::Edgeworth => edgeworth_coefficients(&m, s.horizon_days),
            MethodArg::IvFit | MethodArg::All => unreachable!("filtered above"),
        };
        rows.push(coeff_row(&c, &m, s.regime, s.len()));
    }
    Ok(rows)
}

// --------------------------------------------------------------- edgeworth

#[derive(Debug, Serialize, Deserialize)]
pub struct EdgeworthRow {
    pub horizon_days: u32,
    pub regime: String,
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub skew_over_6: f64,
    pub kurt_over_24: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

fn edgeworth_row(m: &MomentSummary, horizon_days: u32, regime: Regime) -> EdgeworthRow {
    let c = edgeworth_coefficients(m, horizon_days);
    EdgeworthRow {
        horizon_days,
        regime: regime.to_string(),
        n: m.count,
        mean: m.mean,
        std: m.std,
        median: m.median,
        skewness: m.skewness,
        excess_kurtosis: m.excess_kurtosis,
        skew_over_6: m.skewness / 6.0,
        kurt_over_24: m.excess_kurtosis / 24.0,
        alpha: c.alpha,
        beta: c.beta,
        gamma: c.gamma,
    }
}

fn cmd_edgeworth(g: &Globals, a: EdgeworthArgs) -> Result<()> {
    let input =
        a.input.clone().ok_or_else(|| Error::Usage("edgeworth requires --input".into()))?;
    let mut rows = Vec::new();
    if looks_like_ensemble(&input)? {
        let full = PathEnsemble::read_binary(&input)?;
        let regime = a.regime.map(RegimeArg::to_regime).unwrap_or(Regime::All);
        let full = full.filter_regime(regime)?;
        let horizons = match &a.horizons {
            Some(spec) => parse_horizons(spec)?,
            None => vec![full.horizon_days()],
        };
        for &t in &horizons {
            let sub = full.prefix(t)?;
            let m = compute_moments(&sub.terminal_sample()?)?;
            rows.push(edgeworth_row(&m, t, regime));
        }
    } else {
        if a.horizons.is_some() {
            return Err(Error::Usage(
                "--horizons applies to ensembles; a sample file fixes its own horizon".into(),
            ));
        }
        let s = read_sample_csv(&input)?;
        let m = compute_moments(&s)?;
        rows.push(edgeworth_row(&m, s.horizon_days, s.regime));
    }
    write_rows(g, &rows)
}

// ------------------------------------------------------------------ ingest

#[derive(Debug, Serialize, Deserialize)]
pub struct IngestRow {
    pub regime: String,
    pub horizon_days: u32,
    pub n: usize,
    pub raw_mean: f64,
    pub raw_std: f64,
    pub overlapping: bool,
    pub path: String,
}

fn cmd_ingest(g: &Globals, a: IngestArgs) -> Result<()> {
    let input = a.input.clone().ok_or_else(|| Error::Usage("ingest requires --input".into()))?;
    let horizon = a.horizon.unwrap_or(20);
    let out_dir = a.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let stem = input
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::Usage(format!("cannot derive a name from {}", input.display())))?
        .to_string();

    let series = parse_ohlc_csv(&input)?;
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut rows = Vec::new();
    for regime in [Regime::All, Regime::HighVol, Regime::LowVol] {
        let s = match build_return_windows(&series, horizon, regime) {
            Ok(s) => s,
            Err(e @ Error::InsufficientWindows { .. }) if regime != Regime::All => {
                log::warn!("skipping {regime}: {e}");
                continue;
            }
            Err(e) => return Err(e),
        };
        let path = out_dir.join(format!("{stem}_T{horizon}_{regime}.csv"));
        write_sample_csv(&s, &path)?;
        log::info!(
            "wrote {} windows to {} (+ {})",
            s.len(),
            path.display(),
            sample_sidecar_path(&path).display()
        );
        rows.push(IngestRow {
            regime: regime.to_string(),
            horizon_days: horizon,
            n: s.len(),
            raw_mean: s.standardization.raw_mean,
            raw_std: s.standardization.raw_std,
            overlapping: s.overlapping,
            path: path.display().to_string(),
        });
    }
    write_rows(g, &rows)
}

// ------------------------------------------------------------------ report

/// Long-format row: one quantity per line, ready for plotting tools.
#[derive(Debug, Serialize, Deserialize)]
pub struct ReportRow {
    pub horizon_days: u32,
    pub regime: String,
    pub method: String,
    pub quantity: String,
    pub value: f64,
    pub std_error: Option<f64>,
    pub source: String,
}

fn cmd_report(g: &Globals, a: ReportArgs) -> Result<()> {
    if a.inputs.is_empty() {
        return Err(Error::Usage("report requires at least one --inputs table".into()));
    }
    let mut rows = Vec::new();
    for input in &a.inputs {
        let source = input
            .file_name()
            .and_then(|s| s.to_str())
            .unwrap_or("input")
            .to_string();
        let mut reader = csv::Reader::from_path(input)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", input.display())))?;
        let mut any = false;
        for record in reader.deserialize() {
            let r: EstimateRow = record?;
            any = true;
            let mut push = |quantity: &str, value: f64, se: Option<f64>| {
                rows.push(ReportRow {
                    horizon_days: r.horizon_days,
                    regime: r.regime.clone(),
                    method: r.method.clone(),
                    quantity: quantity.to_string(),
                    value,
                    std_error: se,
                    source: source.clone(),
                });
            };
            push("alpha", r.alpha, r.alpha_se);
            push("beta", r.beta, r.beta_se);
            push("gamma", r.gamma, r.gamma_se);
            push("skew_over_6", r.skew_over_6, None);
            push("kurt_over_24", r.kurt_over_24, None);
        }
        if !any {
            return Err(Error::NoData { context: format!("estimate table {}", input.display()) });
        }
    }
    write_rows(g, &rows)
}

// ----------------------------------------------------------------- helpers

fn parse_horizons(spec: &str) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for tok in spec.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            continue;
        }
        if let Some((a, b)) = tok.split_once("..") {
            let lo: u32 = a
                .trim()
                .parse()
                .map_err(|_| Error::Usage(format!("bad horizon range start {a:?}")))?;
            let hi: u32 = b
                .trim()
                .parse()
                .map_err(|_| Error::Usage(format!("bad horizon range end {b:?}")))?;
            if lo == 0 || hi < lo {
                return Err(Error::Usage(format!("bad horizon range {tok:?}")));
            }
            out.extend(lo..=hi);
        } else {
            let t: u32 =
                tok.parse().map_err(|_| Error::Usage(format!("bad horizon {tok:?}")))?;
            if t == 0 {
                return Err(Error::Usage("horizons must be at least 1".into()));
            }
            out.push(t);
        }
    }
    if out.is_empty() {
        return Err(Error::Usage("no horizons given".into()));
    }
    Ok(out)
}

fn parse_f64_list(spec: &str, what: &str) -> Result<Vec<f64>> {
    let vals: Vec<f64> = spec
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::Usage(format!("bad {what} entry {t:?}"))))
        .collect::<Result<_>>()?;
    if vals.is_empty() {
        return Err(Error::Usage(format!("empty {what}")));
    }
    Ok(vals)
}

fn open_output(g: &Globals) -> Result<Box<dyn std::io::Write>> {
    Ok(match &g.output {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::BufWriter::new(std::io::stdout())),
    })
}

fn write_rows<T: Serialize>(g: &Globals, rows: &[T]) -> Result<()> {
    let mut out = open_output(g)?;
    match g.format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
            out.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horizons_parse_lists_and_ranges() {
        assert_eq!(parse_horizons("1..5,10, 20").unwrap(), vec![1, 2, 3, 4, 5, 10, 20]);
        assert_eq!(parse_horizons("7").unwrap(), vec![7]);
        assert!(parse_horizons("0").is_err());
        assert!(parse_horizons("5..2").is_err());
        assert!(parse_horizons("").is_err());
        assert!(parse_horizons("abc").is_err());
    }

    #[test]
    fn f64_list_parses() {
        assert_eq!(parse_f64_list("0.5, 0.4,0.3", "x").unwrap(), vec![0.5, 0.4, 0.3]);
        assert!(parse_f64_list("a,b", "x").is_err());
        assert!(parse_f64_list("", "x").is_err());
    }

    #[test]
    fn cli_structure_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn toml_config_round_trip() {
        let cfg: FileConfig = toml::from_str(
            r#"
            seed = 9
            format = "json"
            [simulate]
            model = "gaarch"
            rho = 0.95
            paths = 500
            [estimate]
            n-boot = 150
            no-hedge = true
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(9));
        assert_eq!(cfg.format, Some(OutputFormat::Json));
        let sim = cfg.simulate.unwrap();
        assert_eq!(sim.model, Some(ModelKind::Gaarch));
        assert_eq!(sim.rho, Some(0.95));
        assert_eq!(sim.paths, Some(500));
        let est = cfg.estimate.unwrap();
        assert_eq!(est.n_boot, Some(150));
        assert!(est.no_hedge);
    }

    #[test]
    fn unknown_config_keys_rejected() {
        let r: std::result::Result<FileConfig, _> = toml::from_str("sede = 9");
        assert!(r.is_err());
    }

    #[test]
    fn flags_override_config() {
        let a = SimulateArgs { paths: Some(100), ..Default::default() };
        let f = SimulateArgs { paths: Some(999), vol: Some(0.02), ..Default::default() };
        let m = a.merged(Some(f));
        assert_eq!(m.paths, Some(100));
        assert_eq!(m.vol, Some(0.02));
    }
}
