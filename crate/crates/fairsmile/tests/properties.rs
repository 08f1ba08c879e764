// Distribution-free invariants on randomized inputs: scaling and symmetry
// of the estimators, analytic bounds, moment feasibility, price bounds and
// inversion round trips. Each property generalizes a pointwise unit test in
// the library to the whole input domain.

use proptest::prelude::*;

use fairsmile::marketdata::{rogers_satchell, OhlcBar};
use fairsmile::moments::from_values;
use fairsmile::pricing::{
    bachelier_call, bachelier_implied_vol, bachelier_vega, black_scholes_call,
    black_scholes_implied_vol, fit_smile_quadratic, SmilePoint, DEFAULT_MONEYNESS_GRID,
};
use fairsmile::sample::standardize;
use fairsmile::smile::{
    alpha_hat, beta_hat, gamma_hat, GaussianMoneynessCoefficients, KernelConfig,
};

fn sqrt_half_pi() -> f64 {
    (std::f64::consts::PI / 2.0).sqrt()
}

/// Raw return vectors with enough spread to standardize.
fn raw_returns() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.2f64..0.2, 32..200).prop_filter("needs spread", |v| {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n > 1e-8
    })
}

proptest! {
    // Standardized samples, and hence every coefficient, are invariant under
    // rescaling the raw returns.
    #[test]
    fn standardization_is_scale_invariant(raw in raw_returns(), c in 0.0625f64..16.0) {
        let scaled: Vec<f64> = raw.iter().map(|r| c * r).collect();
        let a = standardize(&raw, 1).unwrap();
        let b = standardize(&scaled, 1).unwrap();
        for (x, y) in a.samples().iter().zip(b.samples()) {
            prop_assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
        prop_assert!((alpha_hat(&a) - alpha_hat(&b)).abs() < 1e-9);
        prop_assert!((beta_hat(&a) - beta_hat(&b)).abs() < 1e-9);
        let k = KernelConfig::default();
        let ga = gamma_hat(&a, &k).unwrap();
        let gb = gamma_hat(&b, &k).unwrap();
        prop_assert!((ga - gb).abs() < 1e-9, "{ga} vs {gb}");
    }

    // Negating returns flips the smile: beta changes sign while alpha and
    // gamma, which see only |u| and u^2, are untouched.
    #[test]
    fn sign_flip_negates_beta_only(raw in raw_returns()) {
        let neg: Vec<f64> = raw.iter().map(|r| -r).collect();
        let a = standardize(&raw, 1).unwrap();
        let b = standardize(&neg, 1).unwrap();
        prop_assert!((alpha_hat(&a) - alpha_hat(&b)).abs() < 1e-12);
        prop_assert!((beta_hat(&a) + beta_hat(&b)).abs() < 1e-12);
        let k = KernelConfig::default();
        let ga = gamma_hat(&a, &k).unwrap();
        let gb = gamma_hat(&b, &k).unwrap();
        prop_assert!((ga - gb).abs() < 1e-12, "{ga} vs {gb}");
    }

    // alpha = sqrt(pi/2) E|u| lies in (0, sqrt(pi/2)] because E|u| <=
    // sqrt(E u^2) = 1; |beta| <= sqrt(pi/2) because |1 - 2 P(u > 0)| <= 1.
    #[test]
    fn alpha_and_beta_obey_analytic_bounds(raw in raw_returns()) {
        let s = standardize(&raw, 1).unwrap();
        let bound = sqrt_half_pi() * (1.0 + 1e-12);
        let a = alpha_hat(&s);
        prop_assert!(a > 0.0 && a <= bound, "alpha {a}");
        prop_assert!(beta_hat(&s).abs() <= bound);
    }

    // Pearson's inequality: excess kurtosis >= skewness^2 - 2 for every
    // sample under population normalization.
    #[test]
    fn kurtosis_dominates_skew_squared(raw in raw_returns()) {
        let m = from_values(&raw).unwrap();
        prop_assert!(
            m.excess_kurtosis >= m.skewness * m.skewness - 2.0 - 1e-9,
            "skew {} kurt {}",
            m.skewness,
            m.excess_kurtosis
        );
    }

    // Shape moments are affine invariants: x -> a + b x keeps skewness and
    // kurtosis (skewness up to the sign of b), and maps mean, std and median
    // the obvious way.
    #[test]
    fn moments_are_affine_equivariant(
        raw in raw_returns(),
        a in -0.05f64..0.05,
        b in 0.05f64..4.0,
        flip in any::<bool>(),
    ) {
        let b = if flip { -b } else { b };
        let mapped: Vec<f64> = raw.iter().map(|x| a + b * x).collect();
        let m0 = from_values(&raw).unwrap();
        let m1 = from_values(&mapped).unwrap();
        prop_assert!((m1.mean - (a + b * m0.mean)).abs() < 1e-12);
        prop_assert!((m1.std - b.abs() * m0.std).abs() < 1e-12 * (1.0 + m1.std));
        prop_assert!((m1.median - (a + b * m0.median)).abs() < 1e-12);
        prop_assert!((m1.skewness - b.signum() * m0.skewness).abs() < 1e-8);
        prop_assert!((m1.excess_kurtosis - m0.excess_kurtosis).abs() < 1e-8);
    }

    // The median sits between the extremes and splits the sample: no more
    // than half the points lie strictly on either side.
    #[test]
    fn median_is_central(raw in raw_returns()) {
        let m = from_values(&raw).unwrap();
        let lo = raw.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo <= m.median && m.median <= hi);
        let below = raw.iter().filter(|&&x| x < m.median).count();
        let above = raw.iter().filter(|&&x| x > m.median).count();
        prop_assert!(below * 2 <= raw.len(), "{below} of {} below", raw.len());
        prop_assert!(above * 2 <= raw.len(), "{above} of {} above", raw.len());
    }

    // Rogers-Satchell variance is nonnegative on any bar whose high and low
    // bracket open and close.
    #[test]
    fn rogers_satchell_nonnegative_on_valid_bars(
        open in 0.5f64..2.0,
        ret in -0.3f64..0.3,
        up in 0.0f64..0.2,
        down in 0.0f64..0.2,
    ) {
        let close = open * ret.exp();
        let bar = OhlcBar {
            date: chrono::NaiveDate::from_ymd_opt(2021, 6, 1).unwrap(),
            open,
            high: open.max(close) * up.exp(),
            low: open.min(close) * (-down).exp(),
            close,
        };
        prop_assert!(bar.validate().is_ok());
        prop_assert!(rogers_satchell(&bar) >= 0.0);
    }

    // Bachelier calls respect arbitrage bounds, increase in vol, and invert
    // back to the input vol.
    #[test]
    fn bachelier_prices_invert(
        s0 in 50.0f64..150.0,
        vol in 0.5f64..30.0,
        t in 0.1f64..25.0,
        m in -2.5f64..2.5,
    ) {
        let strike = s0 + m * vol * t.sqrt();
        let price = bachelier_call(s0, strike, vol, t).unwrap();
        prop_assert!(price > 0.0);
        prop_assert!(price >= (s0 - strike).max(0.0) - 1e-9 * s0);
        prop_assert!(bachelier_vega(s0, strike, vol, t).unwrap() > 0.0);
        let bumped = bachelier_call(s0, strike, vol * 1.05, t).unwrap();
        prop_assert!(bumped > price, "{bumped} vs {price}");
        let iv = bachelier_implied_vol(price, s0, strike, t).unwrap();
        prop_assert!((iv - vol).abs() < 1e-7 * vol, "recovered {iv}, wanted {vol}");
    }

    // Same for Black-Scholes with log-moneyness strikes.
    #[test]
    fn black_scholes_prices_invert(
        s0 in 50.0f64..150.0,
        vol in 0.05f64..0.8,
        t in 0.25f64..5.0,
        m in -1.5f64..1.5,
    ) {
        let strike = s0 * (m * vol * t.sqrt()).exp();
        let price = black_scholes_call(s0, strike, vol, t).unwrap();
        prop_assert!(price > (s0 - strike).max(0.0) - 1e-9 * s0);
        prop_assert!(price < s0);
        let bumped = black_scholes_call(s0, strike, vol * 1.05, t).unwrap();
        prop_assert!(bumped > price);
        let iv = black_scholes_implied_vol(price, s0, strike, t).unwrap();
        prop_assert!((iv - vol).abs() < 1e-7 * vol, "recovered {iv}, wanted {vol}");
    }

    // Gaussian-moneyness coefficients convert to standard moneyness and back
    // without loss.
    #[test]
    fn gaussian_moneyness_round_trips(
        alpha in 0.3f64..3.0,
        beta in -0.8f64..0.8,
        gamma in -0.5f64..0.8,
    ) {
        let g = GaussianMoneynessCoefficients::from_standard(alpha, beta, gamma).unwrap();
        let (a, b, c) = g.to_standard().unwrap();
        prop_assert!((a - alpha).abs() < 1e-12);
        prop_assert!((b - beta).abs() < 1e-12);
        prop_assert!((c - gamma).abs() < 1e-10, "{c} vs {gamma}");
    }

    // A noiseless quadratic smile is fitted exactly, with and without error
    // bars; equal error bars must not move the coefficients.
    #[test]
    fn quadratic_fit_is_exact_on_quadratic_smiles(
        base_vol in 0.005f64..0.05,
        t in 1u32..20,
        alpha in 0.7f64..1.3,
        beta in -0.2f64..0.2,
        gamma in -0.1f64..0.3,
        se in prop::option::of(1e-6f64..1e-4),
    ) {
        let points: Vec<SmilePoint> = DEFAULT_MONEYNESS_GRID
            .iter()
            .map(|&m| SmilePoint {
                moneyness: m,
                implied_vol: base_vol * (alpha + beta * m + gamma * m * m),
                price: 0.0,
                price_se: se.unwrap_or(0.0),
            })
            .collect();
        let c = fit_smile_quadratic(&points, base_vol, t).unwrap();
        prop_assert!((c.alpha - alpha).abs() < 1e-9, "{} vs {alpha}", c.alpha);
        prop_assert!((c.beta - beta).abs() < 1e-9);
        prop_assert!((c.gamma - gamma).abs() < 1e-9);
        prop_assert_eq!(c.alpha_se.is_some(), se.is_some());
        if let Some(s) = c.gamma_se {
            prop_assert!(s > 0.0);
        }
    }
}
