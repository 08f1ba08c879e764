//! OHLC ingestion and the regime-conditioned sampling pipeline.
//!
//! Daily variance comes from the Rogers-Satchell estimator
//! ln(H/O) ln(H/C) + ln(L/O) ln(L/C), smoothed by a 20-day EMA that is
//! strictly causal: the vol attached to day t uses bars before t only. Days
//! are split into high/low vol regimes by the median of the EMA vol, and
//! overlapping close-to-close T-day returns inside a regime are standardized
//! into a [`SampleSet`].

use chrono::NaiveDate;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::moments;
use crate::sample::{Regime, SampleSet, Standardization};

/// EMA window, days. The mean lifetime of the exponential weights.
pub const EMA_WINDOW: usize = 20;

/// One daily bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OhlcBar {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
}

impl OhlcBar {
    /// Bar invariants: positive prices, high/low bracket open and close.
    pub fn validate(&self) -> std::result::Result<(), String> {
        for (name, v) in
            [("open", self.open), ("high", self.high), ("low", self.low), ("close", self.close)]
        {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be a positive price, got {v}"));
            }
        }
        if self.high < self.open.max(self.close) {
            return Err(format!(
                "high {} below max(open, close) = {}",
                self.high,
                self.open.max(self.close)
            ));
        }
        if self.low > self.open.min(self.close) {
            return Err(format!(
                "low {} above min(open, close) = {}",
                self.low,
                self.open.min(self.close)
            ));
        }
        Ok(())
    }
}

/// Rogers-Satchell daily variance. Nonnegative on any valid bar: with
/// H >= max(O, C) both logs in the first product are >= 0, and with
/// L <= min(O, C) both logs in the second are <= 0.
pub fn rogers_satchell(bar: &OhlcBar) -> f64 {
    let h_o = (bar.high / bar.open).ln();
    let h_c = (bar.high / bar.close).ln();
    let l_o = (bar.low / bar.open).ln();
    let l_c = (bar.low / bar.close).ln();
    h_o * h_c + l_o * l_c
}

/// A validated, dated bar series with its derived vol and regime columns.
#[derive(Debug, Clone, PartialEq)]
pub struct OhlcSeries {
    bars: Vec<OhlcBar>,
    rs_variance: Vec<f64>,
    ema_vol: Vec<Option<f64>>,
    regime: Vec<Option<Regime>>,
}

impl OhlcSeries {
    /// Validate the bars and compute the derived columns. Series shorter
    /// than the EMA window are legal; they simply have no labeled days.
    pub fn new(bars: Vec<OhlcBar>) -> Result<Self> {
        if bars.is_empty() {
            return Err(Error::NoData { context: "empty bar series".into() });
        }
        for (i, bar) in bars.iter().enumerate() {
            bar.validate().map_err(|message| Error::MalformedRow {
                line: i as u64 + 1,
                message,
            })?;
        }
        for w in bars.windows(2) {
            if w[1].date <= w[0].date {
                return Err(Error::invalid(format!(
                    "dates must be strictly increasing: {} then {}",
                    w[0].date, w[1].date
                )));
            }
        }
        let rs_variance: Vec<f64> = bars.iter().map(rogers_satchell).collect();
        let ema_vol = if bars.len() > EMA_WINDOW {
            ema_vol(&bars, EMA_WINDOW)?
        } else {
            vec![None; bars.len()]
        };
        let regime = regime_split(&ema_vol);
        Ok(OhlcSeries { bars, rs_variance, ema_vol, regime })
    }

    pub fn bars(&self) -> &[OhlcBar] {
        &self.bars
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn rs_variance(&self) -> &[f64] {
        &self.rs_variance
    }

    /// Strictly causal trailing vol per day; None before enough history.
    pub fn ema_vol(&self) -> &[Option<f64>] {
        &self.ema_vol
    }

    /// High/low label per day; None where the vol is undefined.
    pub fn regime(&self) -> &[Option<Regime>] {
        &self.regime
    }
}

/// EMA states of `values` with decay 1/window, seeded by the mean of the
/// first `window` values. `out[j]` is the state after consuming
/// `values[..window + j]`; None if there are fewer than `window` values.
pub(crate) fn ema_states(values: &[f64], window: usize) -> Option<Vec<f64>> {
    if window == 0 || values.len() < window {
        return None;
    }
    let lambda = 1.0 / window as f64;
    let seed = values[..window].iter().sum::<f64>() / window as f64;
    let mut out = Vec::with_capacity(values.len() - window + 1);
    let mut state = seed;
    out.push(state);
    for &v in &values[window..] {
        state = (1.0 - lambda) * state + lambda * v;
        out.push(state);
    }
    Some(out)
}

/// Trailing EMA vol per day. The value for day t is built from
/// Rogers-Satchell variances of bars strictly before t, so mutating bar t
/// never changes its own vol or regime label.
pub fn ema_vol(bars: &[OhlcBar], window: usize) -> Result<Vec<Option<f64>>> {
    if window == 0 {
        return Err(Error::invalid("EMA window must be positive"));
    }
    if bars.len() < window {
        return Err(Error::invalid(format!(
            "series too short: EMA window {window} needs at least {window} bars, got {}",
            bars.len()
        )));
    }
    let rs: Vec<f64> = bars.iter().map(rogers_satchell).collect();
    let states = ema_states(&rs, window).expect("length checked above");
    let mut out = vec![None; bars.len()];
    for t in window..bars.len() {
        // states[t - window] consumed rs[..=t-1]: everything before day t.
        out[t] = Some(states[t - window].max(0.0).sqrt());
    }
    Ok(out)
}

/// Median split of the labeled days: high iff vol strictly above the median,
/// so exact-median ties land in the low regime.
pub fn regime_split(ema_vols: &[Option<f64>]) -> Vec<Option<Regime>> {
    let labeled: Vec<f64> = ema_vols.iter().flatten().copied().collect();
    if labeled.is_empty() {
        return vec![None; ema_vols.len()];
    }
    let med = moments::median(&labeled).expect("nonempty");
    ema_vols
        .iter()
        .map(|v| v.map(|x| if x > med { Regime::HighVol } else { Regime::LowVol }))
        .collect()
}

/// Raw close-to-close T-day returns starting on days in the given regime.
/// For `Regime::All` every start day with a complete window counts, labeled
/// or not.
pub fn close_to_close_returns(
    series: &OhlcSeries,
    horizon_days: u32,
    regime: Regime,
) -> Result<Vec<f64>> {
    if !(1..=60).contains(&horizon_days) {
        return Err(Error::invalid(format!(
            "horizon must be between 1 and 60 days, got {horizon_days}"
        )));
    }
    let t_len = horizon_days as usize;
    let bars = series.bars();
    if bars.len() <= t_len {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for t in 0..bars.len() - t_len {
        let in_regime = match regime {
            Regime::All => true,
            r => series.regime()[t] == Some(r),
        };
        if in_regime {
            out.push(bars[t + t_len].close / bars[t].close - 1.0);
        }
    }
    Ok(out)
}

/// Minimum window count for a regime sample.
pub const MIN_WINDOWS: usize = 50;

/// Overlapping T-day return windows in a regime, standardized per regime.
pub fn build_return_windows(
    series: &OhlcSeries,
    horizon_days: u32,
    regime: Regime,
) -> Result<SampleSet> {
    let raw = close_to_close_returns(series, horizon_days, regime)?;
    if raw.len() < MIN_WINDOWS {
        return Err(Error::InsufficientWindows { needed: MIN_WINDOWS, got: raw.len() });
    }
    let mut s = crate::sample::standardize(&raw, horizon_days)?
        .with_regime(regime)
        .with_source("ohlc");
    s.overlapping = horizon_days > 1;
    Ok(s)
}

/// Parse an OHLC CSV with header `date,open,high,low,close` (ISO dates).
/// The first invalid row aborts the parse with its line number.
pub fn parse_ohlc_csv(path: &Path) -> Result<OhlcSeries> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = reader.headers()?.clone();
    let expected = ["date", "open", "high", "low", "close"];
    let got: Vec<String> =
        headers.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    if got != expected {
        return Err(Error::invalid(format!(
            "expected header {}, got {}",
            expected.join(","),
            got.join(",")
        )));
    }

    let mut bars = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let bar = parse_bar(&record).map_err(|message| Error::MalformedRow { line, message })?;
        bar.validate().map_err(|message| Error::MalformedRow { line, message })?;
        if let Some(prev) = bars.last() {
            let prev: &OhlcBar = prev;
            if bar.date <= prev.date {
                return Err(Error::MalformedRow {
                    line,
                    message: format!(
                        "dates must be strictly increasing: {} follows {}",
                        bar.date, prev.date
                    ),
                });
            }
        }
        bars.push(bar);
    }
    if bars.is_empty() {
        return Err(Error::NoData { context: format!("{} has no rows", path.display()) });
    }
    OhlcSeries::new(bars)
}

fn parse_bar(record: &csv::StringRecord) -> std::result::Result<OhlcBar, String> {
    if record.len() != 5 {
        return Err(format!("expected 5 fields, got {}", record.len()));
    }
    let date = record[0]
        .parse::<NaiveDate>()
        .map_err(|e| format!("bad date '{}': {e}", &record[0]))?;
    let mut prices = [0.0f64; 4];
    for (i, slot) in prices.iter_mut().enumerate() {
        *slot = record[i + 1]
            .parse::<f64>()
            .map_err(|e| format!("bad price '{}': {e}", &record[i + 1]))?;
    }
    Ok(OhlcBar { date, open: prices[0], high: prices[1], low: prices[2], close: prices[3] })
}

/// Write bars in the same CSV schema `parse_ohlc_csv` reads.
pub fn write_ohlc_csv(bars: &[OhlcBar], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["date", "open", "high", "low", "close"])?;
    for b in bars {
        w.write_record([
            b.date.to_string(),
            format!("{}", b.open),
            format!("{}", b.high),
            format!("{}", b.low),
            format!("{}", b.close),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Synthetic Gaussian OHLC series: exact N(0, vol^2) close-to-close daily
/// returns with Brownian-bridge intraday highs and lows, gapless (each open
/// equals the previous close). The end-to-end pipeline oracle.
pub fn synthetic_ohlc(vol: f64, n_days: usize, seed: u64) -> Result<Vec<OhlcBar>> {
    if !(vol > 0.0 && vol < 0.1) {
        return Err(Error::invalid("synthetic vol must be in (0, 0.1) per day"));
    }
    if n_days == 0 {
        return Err(Error::invalid("need at least one day"));
    }
    // Enough intraday resolution that the sampled high/low sit close to the
    // continuous extremes; at 64 steps Rogers-Satchell recovers most of the
    // daily variance instead of half of it.
    const SUBSTEPS: usize = 64;
    let mut rng = crate::rng::substream(seed, 0);
    let start = NaiveDate::from_ymd_opt(1970, 1, 2).unwrap();
    let mut bars = Vec::with_capacity(n_days);
    let mut open = 100.0f64;
    let mut walk = [0.0f64; SUBSTEPS + 1];
    for d in 0..n_days {
        let r: f64 = vol * rng.sample::<f64, _>(StandardNormal);
        let close = open * (1.0 + r);
        for j in 1..=SUBSTEPS {
            walk[j] = walk[j - 1] + rng.sample::<f64, _>(StandardNormal);
        }
        let w_end = walk[SUBSTEPS];
        let mut high = open.max(close);
        let mut low = open.min(close);
        let sub_vol = open * vol / (SUBSTEPS as f64).sqrt();
        for j in 1..SUBSTEPS {
            let f = j as f64 / SUBSTEPS as f64;
            let bridge = walk[j] - f * w_end;
            let price = open + (close - open) * f + sub_vol * bridge;
            high = high.max(price);
            low = low.min(price);
        }
        let date = start
            .checked_add_days(chrono::Days::new(d as u64))
            .ok_or_else(|| Error::invalid("date overflow"))?;
        bars.push(OhlcBar { date, open, high, low: low.max(open * 0.01), close });
        open = close;
    }
    Ok(bars)
}

/// Metadata sidecar stored next to a sample CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub horizon_days: u32,
    pub regime: Regime,
    pub count: usize,
    /// Mean removed from the raw returns at standardization.
    pub raw_mean: f64,
    /// Std the raw returns were divided by.
    pub raw_std: f64,
    pub overlapping: bool,
    pub source: String,
}

/// Sidecar path for a sample CSV: `samples.csv` -> `samples.meta.json`.
pub fn sample_sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

/// Write a sample as CSV (header `u`, one value per row, shortest exact
/// decimal representation) plus a JSON metadata sidecar. Byte-deterministic.
pub fn write_sample_csv(s: &SampleSet, csv_path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(csv_path)?);
    writeln!(w, "u")?;
    for u in s.samples() {
        writeln!(w, "{u}")?;
    }
    w.flush()?;
    let meta = SampleMeta {
        horizon_days: s.horizon_days,
        regime: s.regime,
        count: s.len(),
        raw_mean: s.standardization.raw_mean,
        raw_std: s.standardization.raw_std,
        overlapping: s.overlapping,
        source: s.source.clone(),
    };
    let json = serde_json::to_string_pretty(&meta)?;
    std::fs::write(sample_sidecar_path(csv_path), json)?;
    Ok(())
}

/// Read a sample CSV and its sidecar back into a [`SampleSet`].
pub fn read_sample_csv(csv_path: &Path) -> Result<SampleSet> {
    let sidecar = sample_sidecar_path(csv_path);
    let meta: SampleMeta = serde_json::from_str(
        &std::fs::read_to_string(&sidecar).map_err(|e| {
            Error::Config(format!("missing sample sidecar {}: {e}", sidecar.display()))
        })?,
    )?;
    let mut reader = csv::ReaderBuilder::new().from_path(csv_path)?;
    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let v: f64 = record
            .get(0)
            .unwrap_or("")
            .parse()
            .map_err(|e| Error::MalformedRow { line, message: format!("bad sample: {e}") })?;
        samples.push(v);
    }
    if samples.len() != meta.count {
        return Err(Error::Config(format!(
            "sidecar says {} samples, file has {}",
            meta.count,
            samples.len()
        )));
    }
    let mut s = SampleSet::from_standardized(samples, meta.horizon_days)?
        .with_regime(meta.regime)
        .with_source(meta.source);
    s.standardization = Standardization { raw_mean: meta.raw_mean, raw_std: meta.raw_std };
    s.overlapping = meta.overlapping;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_bar(date: &str, price: f64) -> OhlcBar {
        OhlcBar {
            date: date.parse().unwrap(),
            open: price,
            high: price,
            low: price,
            close: price,
        }
    }

    fn flat_series(prices: &[f64]) -> OhlcSeries {
        let bars: Vec<OhlcBar> = prices
            .iter()
            .enumerate()
            .map(|(i, &p)| OhlcBar {
                date: NaiveDate::from_ymd_opt(2000, 1, 1)
                    .unwrap()
                    .checked_add_days(chrono::Days::new(i as u64))
                    .unwrap(),
                open: p,
                high: p * 1.001,
                low: p * 0.999,
                close: p,
            })
            .collect();
        OhlcSeries::new(bars).unwrap()
    }

    #[test]
    fn rs_flat_bar_is_zero() {
        let b = flat_bar("2020-01-02", 100.0);
        assert_eq!(rogers_satchell(&b), 0.0);
    }

    #[test]
    fn rs_worked_example() {
        let b = OhlcBar {
            date: "2020-01-02".parse().unwrap(),
            open: 100.0,
            high: 110.0,
            low: 95.0,
            close: 105.0,
        };
        assert!((rogers_satchell(&b) - 0.009567).abs() < 1e-5);
    }

    #[test]
    fn rs_nonnegative_on_random_bars() {
        let mut rng = crate::rng::substream(1, 0);
        for _ in 0..2000 {
            let open = 50.0 + 100.0 * rng.gen::<f64>();
            let close = open * (1.0 + 0.05 * (rng.gen::<f64>() - 0.5));
            let high = open.max(close) * (1.0 + 0.03 * rng.gen::<f64>());
            let low = open.min(close) * (1.0 - 0.03 * rng.gen::<f64>());
            let b = OhlcBar { date: "2020-01-02".parse().unwrap(), open, high, low, close };
            b.validate().unwrap();
            assert!(rogers_satchell(&b) >= 0.0, "{b:?}");
        }
    }

    #[test]
    fn parse_well_formed() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ohlc.csv");
        std::fs::write(
            &p,
            "date,open,high,low,close\n\
             2020-01-02,100,101,99,100.5\n\
             2020-01-03,100.5,102,100,101\n\
             2020-01-06,101,101.5,99.5,100\n",
        )
        .unwrap();
        let s = parse_ohlc_csv(&p).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.bars()[2].close, 100.0);
    }

    #[test]
    fn parse_rejects_bad_bar_with_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ohlc.csv");
        std::fs::write(
            &p,
            "date,open,high,low,close\n\
             2020-01-02,100,101,99,100.5\n\
             2020-01-03,100,99.5,98,99\n",
        )
        .unwrap();
        let err = parse_ohlc_csv(&p).unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("line 3"), "{msg}");
        assert!(msg.contains("high"), "{msg}");
    }

    #[test]
    fn parse_rejects_empty() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ohlc.csv");
        std::fs::write(&p, "date,open,high,low,close\n").unwrap();
        let err = parse_ohlc_csv(&p).unwrap_err();
        assert!(err.to_string().contains("no data"), "{err}");
    }

    #[test]
    fn parse_rejects_wrong_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ohlc.csv");
        std::fs::write(&p, "date,open,close\n2020-01-02,1,1\n").unwrap();
        assert!(parse_ohlc_csv(&p).is_err());
    }

    #[test]
    fn parse_rejects_bad_date_and_non_monotone() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        std::fs::write(
            &p,
            "date,open,high,low,close\n02/01/2020,100,101,99,100\n",
        )
        .unwrap();
        assert!(parse_ohlc_csv(&p).unwrap_err().to_string().contains("bad date"));

        let q = dir.path().join("b.csv");
        std::fs::write(
            &q,
            "date,open,high,low,close\n\
             2020-01-03,100,101,99,100\n\
             2020-01-02,100,101,99,100\n",
        )
        .unwrap();
        let err = parse_ohlc_csv(&q).unwrap_err();
        assert!(err.to_string().contains("strictly increasing"), "{err}");
    }

    #[test]
    fn ema_constant_rs_reaches_fixed_point() {
        // All bars identical: RS is the same constant c every day, so the
        // EMA equals c and the vol is sqrt(c).
        let bars: Vec<OhlcBar> = (0..40)
            .map(|i| OhlcBar {
                date: NaiveDate::from_ymd_opt(2000, 1, 1)
                    .unwrap()
                    .checked_add_days(chrono::Days::new(i))
                    .unwrap(),
                open: 100.0,
                high: 102.0,
                low: 99.0,
                close: 101.0,
            })
            .collect();
        let c = rogers_satchell(&bars[0]);
        assert!(c > 0.0);
        let vols = ema_vol(&bars, EMA_WINDOW).unwrap();
        for t in 0..EMA_WINDOW {
            assert!(vols[t].is_none());
        }
        for t in EMA_WINDOW..40 {
            assert!((vols[t].unwrap() - c.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn ema_spike_decays_geometrically() {
        // One wide bar in an otherwise flat series: past the spike the EMA
        // variance decays by (1 - 1/20) per day.
        let mut bars: Vec<OhlcBar> = (0..45)
            .map(|i| {
                let mut b = flat_bar("2000-01-01", 100.0);
                b.date = NaiveDate::from_ymd_opt(2000, 1, 1)
                    .unwrap()
                    .checked_add_days(chrono::Days::new(i))
                    .unwrap();
                b
            })
            .collect();
        bars[25] = OhlcBar { high: 105.0, low: 95.0, ..bars[25] };
        let vars: Vec<f64> = {
            let vols = ema_vol(&bars, EMA_WINDOW).unwrap();
            vols.iter().map(|v| v.map(|x| x * x).unwrap_or(f64::NAN)).collect()
        };
        // Day 26 sees the spike; afterwards pure decay.
        for t in 27..44 {
            assert!((vars[t + 1] / vars[t] - 0.95).abs() < 1e-9, "day {t}");
        }
    }

    #[test]
    fn ema_is_strictly_causal() {
        let mut bars: Vec<OhlcBar> = (0..30)
            .map(|i| {
                let mut b = flat_bar("2000-01-01", 100.0);
                b.date = NaiveDate::from_ymd_opt(2000, 1, 1)
                    .unwrap()
                    .checked_add_days(chrono::Days::new(i))
                    .unwrap();
                b.high = 100.0 + (i as f64 % 5.0);
                b.low = 99.0;
                b.close = 100.0;
                b
            })
            .collect();
        let before = ema_vol(&bars, EMA_WINDOW).unwrap();
        // Blow up the last bar: no vol anywhere may change (vol at t uses
        // bars strictly before t, and there is no day after the last).
        bars[29].high = 200.0;
        bars[29].close = 180.0;
        let after = ema_vol(&bars, EMA_WINDOW).unwrap();
        assert_eq!(before, after);

        // Mutating a middle bar t leaves days <= t untouched.
        bars[25].high = 150.0;
        let shifted = ema_vol(&bars, EMA_WINDOW).unwrap();
        assert_eq!(before[..=25], shifted[..=25]);
        assert_ne!(before[26], shifted[26]);
    }

    #[test]
    fn ema_too_short_errors() {
        let bars = vec![flat_bar("2020-01-02", 100.0); 5];
        let err = ema_vol(&bars, EMA_WINDOW).unwrap_err();
        assert!(err.to_string().contains("series too short"), "{err}");
    }

    #[test]
    fn regime_split_balanced_on_increasing_vols() {
        let vols: Vec<Option<f64>> = (0..10).map(|i| Some(0.01 + 0.001 * i as f64)).collect();
        let labels = regime_split(&vols);
        let high = labels.iter().filter(|l| **l == Some(Regime::HighVol)).count();
        let low = labels.iter().filter(|l| **l == Some(Regime::LowVol)).count();
        assert_eq!((high, low), (5, 5));
    }

    #[test]
    fn regime_split_all_ties_go_low() {
        let vols = vec![Some(0.02); 8];
        let labels = regime_split(&vols);
        assert!(labels.iter().all(|l| *l == Some(Regime::LowVol)));
    }

    #[test]
    fn regime_split_is_permutation_invariant() {
        let vols: Vec<Option<f64>> =
            [0.03, 0.01, 0.05, 0.02, 0.04, 0.015].iter().map(|&v| Some(v)).collect();
        let labels = regime_split(&vols);
        let perm = [5usize, 3, 1, 0, 2, 4];
        let shuffled: Vec<Option<f64>> = perm.iter().map(|&i| vols[i]).collect();
        let shuffled_labels = regime_split(&shuffled);
        for (k, &i) in perm.iter().enumerate() {
            assert_eq!(shuffled_labels[k], labels[i]);
        }
    }

    #[test]
    fn close_to_close_worked_example() {
        let s = flat_series(&[100.0, 101.0, 99.0]);
        let r = close_to_close_returns(&s, 1, Regime::All).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0] - 0.01).abs() < 1e-12);
        assert!((r[1] - (99.0 / 101.0 - 1.0)).abs() < 1e-12);
        assert!((r[1] - (-0.0198)).abs() < 1e-4);
    }

    #[test]
    fn horizon_bounds_checked() {
        let s = flat_series(&[100.0; 70]);
        assert!(close_to_close_returns(&s, 0, Regime::All).is_err());
        assert!(close_to_close_returns(&s, 61, Regime::All).is_err());
    }

    #[test]
    fn windows_error_without_regime_days() {
        // 10 bars: too short for any EMA labels, so the high regime is empty.
        let s = flat_series(&[100.0; 10]);
        let err = build_return_windows(&s, 1, Regime::HighVol).unwrap_err();
        assert!(err.to_string().contains("insufficient windows"), "{err}");
    }

    #[test]
    fn synthetic_bars_are_valid_and_gapless() {
        let bars = synthetic_ohlc(0.01, 500, 3).unwrap();
        assert_eq!(bars.len(), 500);
        for b in &bars {
            b.validate().unwrap();
        }
        for w in bars.windows(2) {
            assert_eq!(w[1].open, w[0].close);
            assert!(w[1].date > w[0].date);
        }
    }

    #[test]
    fn synthetic_daily_returns_are_gaussian() {
        let bars = synthetic_ohlc(0.01, 30_000, 4).unwrap();
        let rets: Vec<f64> =
            bars.windows(2).map(|w| w[1].close / w[0].close - 1.0).collect();
        let m = moments::from_values(&rets).unwrap();
        assert!((m.std - 0.01).abs() < 0.0005, "std {}", m.std);
        assert!(m.skewness.abs() < 0.05, "S {}", m.skewness);
        assert!(m.excess_kurtosis.abs() < 0.1, "kappa {}", m.excess_kurtosis);
    }

    #[test]
    fn synthetic_rs_tracks_daily_variance() {
        let bars = synthetic_ohlc(0.01, 20_000, 5).unwrap();
        let mean_rs: f64 =
            bars.iter().map(rogers_satchell).sum::<f64>() / bars.len() as f64;
        // RS estimates the daily variance; sampled extremes sit slightly
        // inside the continuous ones, so expect a mild downward bias.
        assert!(mean_rs > 0.6e-4 && mean_rs < 1.3e-4, "mean RS {mean_rs}");
    }

    #[test]
    fn pipeline_recovers_flat_smile_on_synthetic_data() {
        let bars = synthetic_ohlc(0.01, 6000, 6).unwrap();
        let series = OhlcSeries::new(bars).unwrap();
        let s = build_return_windows(&series, 1, Regime::All).unwrap();
        let k = crate::smile::KernelConfig::default_for_sample_size(s.len());
        let alpha = crate::smile::alpha_hat(&s);
        let beta = crate::smile::beta_hat(&s);
        let gamma = crate::smile::gamma_hat(&s, &k).unwrap();
        assert!((alpha - 1.0).abs() < 0.03, "alpha {alpha}");
        assert!(beta.abs() < 0.05, "beta {beta}");
        assert!(gamma.abs() < 0.05, "gamma {gamma}");
    }

    #[test]
    fn regime_windows_standardize_per_regime() {
        let bars = synthetic_ohlc(0.01, 3000, 7).unwrap();
        let series = OhlcSeries::new(bars).unwrap();
        let hi = build_return_windows(&series, 5, Regime::HighVol).unwrap();
        let lo = build_return_windows(&series, 5, Regime::LowVol).unwrap();
        assert_eq!(hi.regime, Regime::HighVol);
        assert!(hi.overlapping);
        let labeled = series.regime().iter().flatten().count();
        assert!(hi.len() + lo.len() <= labeled);
        // Both regimes separately standardized to unit variance.
        for s in [&hi, &lo] {
            let (m, sd) = crate::sample::mean_std(s.samples());
            assert!(m.abs() < 1e-12);
            assert!((sd - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sample_csv_round_trip_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let bars = synthetic_ohlc(0.01, 1000, 8).unwrap();
        let series = OhlcSeries::new(bars).unwrap();
        let s = build_return_windows(&series, 2, Regime::LowVol).unwrap();

        let p1 = dir.path().join("one.csv");
        let p2 = dir.path().join("two.csv");
        write_sample_csv(&s, &p1).unwrap();
        write_sample_csv(&s, &p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());

        let back = read_sample_csv(&p1).unwrap();
        assert_eq!(back.samples(), s.samples());
        assert_eq!(back.horizon_days, s.horizon_days);
        assert_eq!(back.regime, s.regime);
        assert_eq!(back.overlapping, s.overlapping);
        assert_eq!(back.standardization, s.standardization);
    }

    #[test]
    fn sample_csv_missing_sidecar_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("orphan.csv");
        std::fs::write(&p, "u\n0.5\n-0.5\n").unwrap();
        let err = read_sample_csv(&p).unwrap_err();
        assert!(err.to_string().contains("sidecar"), "{err}");
    }
}
