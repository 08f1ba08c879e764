// The deterministic pricing kit: Bachelier and Black-Scholes calls, their
// implied-vol inversions, and the change of variable between standard and
// Gaussian moneyness for quoted smile coefficients.

use fairsmile::pricing::{
    bachelier_call, bachelier_implied_vol, black_scholes_call, black_scholes_implied_vol,
};
use fairsmile::smile::GaussianMoneynessCoefficients;

fn main() -> fairsmile::Result<()> {
    // Round trips: price at a known vol, invert, recover the vol.
    let (s0, t) = (100.0, 0.25);
    println!("{:>8} {:>8} {:>12} {:>12}", "strike", "vol", "price", "implied");
    for strike in [90.0, 100.0, 110.0] {
        let price = bachelier_call(s0, strike, 20.0, t)?;
        let iv = bachelier_implied_vol(price, s0, strike, t)?;
        println!("{strike:>8.1} {:>8.1} {price:>12.6} {iv:>12.8}", 20.0);
    }
    for strike in [90.0, 100.0, 110.0] {
        let price = black_scholes_call(s0, strike, 0.2, t)?;
        let iv = black_scholes_implied_vol(price, s0, strike, t)?;
        println!("{strike:>8.1} {:>8.3} {price:>12.6} {iv:>12.8}", 0.2);
    }

    // A smile quoted against the implied vol itself (Gaussian moneyness)
    // converts exactly to standard-moneyness coefficients and back.
    let quoted = GaussianMoneynessCoefficients { alpha_p: 1.1, beta_p: -0.08, gamma_p: 0.05 };
    let (alpha, beta, gamma) = quoted.to_standard()?;
    let back = GaussianMoneynessCoefficients::from_standard(alpha, beta, gamma)?;
    println!("\nquoted (alpha', beta', gamma') = ({}, {}, {})", quoted.alpha_p, quoted.beta_p, quoted.gamma_p);
    println!("standard (alpha, beta, gamma)  = ({alpha:.6}, {beta:.6}, {gamma:.6})");
    println!("round trip                     = ({}, {}, {})", back.alpha_p, back.beta_p, back.gamma_p);
    Ok(())
}
