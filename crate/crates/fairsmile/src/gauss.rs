//! Standard-normal helpers shared by the pricing and hedging code.

/// sqrt(2 * pi)
pub(crate) const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// 1 / sqrt(2 * pi), the standard normal density at zero.
pub(crate) const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// sqrt(pi / 2), the prefactor of the exotic-payoff smile estimators.
pub(crate) const SQRT_PI_OVER_2: f64 = 1.253_314_137_315_500_3;

/// Standard normal density.
pub(crate) fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() * INV_SQRT_2PI
}

/// Standard normal CDF via the complementary error function.
pub(crate) fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Upper tail of the standard normal.
pub(crate) fn norm_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}
