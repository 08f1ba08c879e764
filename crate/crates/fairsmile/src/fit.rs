//! Small weighted least-squares polynomial fits.
//!
//! Degrees here are at most 2 or 3, so plain normal equations with a pivoted
//! Gauss-Jordan solve are accurate and dependency-free. With weights equal to
//! inverse variances the inverse normal matrix is the coefficient covariance.

use crate::error::{Error, Result};

pub(crate) struct PolyFit {
    /// Coefficients for powers 0..=degree.
    pub coeffs: Vec<f64>,
    /// Sqrt of the covariance diagonal; only meaningful when the weights were
    /// inverse variances.
    pub standard_errors: Vec<f64>,
}

impl PolyFit {
    #[cfg(test)]
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        let mut p = 1.0;
        for c in &self.coeffs {
            acc += c * p;
            p *= x;
        }
        acc
    }
}

/// Weighted least squares of `y` on `(1, x, x^2, ..., x^degree)`.
pub(crate) fn polyfit_weighted(x: &[f64], y: &[f64], w: &[f64], degree: usize) -> Result<PolyFit> {
    let n = x.len();
    let k = degree + 1;
    if n != y.len() || n != w.len() {
        return Err(Error::invalid("polyfit: mismatched input lengths"));
    }
    if n < k {
        return Err(Error::RankDeficient {
            context: format!("{n} points cannot determine {k} coefficients"),
        });
    }
    if w.iter().any(|&wi| !(wi.is_finite() && wi >= 0.0)) {
        return Err(Error::invalid("polyfit: weights must be finite and non-negative"));
    }

    // Normal equations A^T W A c = A^T W y.
    let mut ata = vec![0.0; k * k];
    let mut aty = vec![0.0; k];
    let mut powers = vec![0.0; k];
    for i in 0..n {
        let mut p = 1.0;
        for slot in powers.iter_mut() {
            *slot = p;
            p *= x[i];
        }
        for a in 0..k {
            aty[a] += w[i] * powers[a] * y[i];
            for b in 0..k {
                ata[a * k + b] += w[i] * powers[a] * powers[b];
            }
        }
    }

    let inv = invert(&ata, k)?;
    let mut coeffs = vec![0.0; k];
    for a in 0..k {
        for b in 0..k {
            coeffs[a] += inv[a * k + b] * aty[b];
        }
    }
    let standard_errors = (0..k).map(|a| inv[a * k + a].max(0.0).sqrt()).collect();
    Ok(PolyFit { coeffs, standard_errors })
}

/// Gauss-Jordan inverse with partial pivoting for tiny dense matrices.
fn invert(m: &[f64], k: usize) -> Result<Vec<f64>> {
    let mut a = m.to_vec();
    let mut inv = vec![0.0; k * k];
    for i in 0..k {
        inv[i * k + i] = 1.0;
    }
    let scale = m.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1e-300);
    for col in 0..k {
        let pivot_row = (col..k)
            .max_by(|&r1, &r2| a[r1 * k + col].abs().total_cmp(&a[r2 * k + col].abs()))
            .unwrap();
        let pivot = a[pivot_row * k + col];
        if pivot.abs() < 1e-13 * scale {
            return Err(Error::RankDeficient {
                context: "singular normal matrix".to_string(),
            });
        }
        if pivot_row != col {
            for j in 0..k {
                a.swap(col * k + j, pivot_row * k + j);
                inv.swap(col * k + j, pivot_row * k + j);
            }
        }
        let inv_pivot = 1.0 / a[col * k + col];
        for j in 0..k {
            a[col * k + j] *= inv_pivot;
            inv[col * k + j] *= inv_pivot;
        }
        for r in 0..k {
            if r == col {
                continue;
            }
            let f = a[r * k + col];
            if f != 0.0 {
                for j in 0..k {
                    a[r * k + j] -= f * a[col * k + j];
                    inv[r * k + j] -= f * inv[col * k + j];
                }
            }
        }
    }
    Ok(inv)
}
