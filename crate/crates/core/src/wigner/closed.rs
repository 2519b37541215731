//! Explicit Wigner series for generalized coherent states with real `alpha`.
//!
//! With `beta = r e^{i delta}` and `Delta_{mn} = tau (m^eps - n^eps)`:
//!
//! ```text
//! W = (2/pi) e^{-alpha^2 - 2r^2} [ e^{-alpha^2 + 4 alpha r cos delta}
//!     - 4 sum_{m>n} (-1)^n alpha^{m+n}/m! sin((m-n) delta + Delta/2) sin(Delta/2)
//!                   (2r)^{m-n} L_n^{m-n}(4r^2) ]
//! ```
//!
//! The first term is the coherent Gaussian; the sum is the change produced by
//! the number-dependent phases. Checked against the displaced-parity
//! evaluator this series holds as written, including the sign of the
//! `(-1)^n` factor and the `-alpha^2 + 4 alpha r cos delta` exponent.
//!
//! Each term is assembled from logarithms of `alpha^{m+n}/m!`, `(2r)^{m-n}` and
//! `|L_n^{m-n}|` (together with the `e^{-alpha^2-2r^2}` prefactor) because the
//! raw factors leave the f64 range long before the product does.

use std::f64::consts::FRAC_2_PI;

use num_complex::Complex64;

use super::laguerre::{laguerre_column, ln_factorials};
use crate::error::{GcsError, Result};
use crate::fock::{phase_power, GcsParams};
use crate::sum::Neumaier;

/// Truncated series with `m, n <= cutoff`.
pub fn wigner_point_closed(params: &GcsParams, beta: Complex64, cutoff: usize) -> Result<f64> {
    params.validate()?;
    let alpha = params.alpha;
    let r = beta.norm();
    let delta = beta.im.atan2(beta.re);
    let x = 4.0 * r * r;

    let gaussian = (-2.0 * alpha * alpha - 2.0 * r * r + 4.0 * alpha * r * delta.cos()).exp();

    let mut series = Neumaier::new();
    if alpha > 0.0 && r > 0.0 {
        let ln_alpha = alpha.ln();
        let ln_2r = (2.0 * r).ln();
        let ln_fact = ln_factorials(cutoff);
        let powers: Vec<f64> = (0..=cutoff).map(|n| phase_power(n, params.epsilon)).collect();
        let prefactor = -alpha * alpha - 2.0 * r * r;
        for k in 1..=cutoff {
            let lag = laguerre_column(cutoff - k, k, x);
            for (n, &l) in lag.iter().enumerate() {
                let m = n + k;
                let half = 0.5 * params.tau * (powers[m] - powers[n]);
                let sines = (k as f64 * delta + half).sin() * half.sin();
                if sines == 0.0 || l == 0.0 {
                    continue;
                }
                if !l.is_finite() {
                    return Err(GcsError::Overflow { re: beta.re, im: beta.im });
                }
                let log_mag = (m + n) as f64 * ln_alpha - ln_fact[m] + k as f64 * ln_2r + l.abs().ln() + prefactor;
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 } * l.signum();
                let term = sign * log_mag.exp() * sines;
                if !term.is_finite() {
                    return Err(GcsError::Overflow { re: beta.re, im: beta.im });
                }
                series.add(term);
            }
        }
    }
    let value = FRAC_2_PI * (gaussian - 4.0 * series.total());
    if !value.is_finite() {
        return Err(GcsError::Overflow { re: beta.re, im: beta.im });
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{auto_cutoff, make_gcs};
    use crate::wigner::{wigner_point_pure, WIGNER_BOUND};

    #[test]
    fn rotated_coherent_peak() {
        let p = GcsParams::new(2.0, 1.0, 0.3).unwrap();
        let beta = Complex64::from_polar(2.0, -0.3);
        let w = wigner_point_closed(&p, beta, 40).unwrap();
        assert!((w - WIGNER_BOUND).abs() < 1e-8, "{w}");
    }

    #[test]
    fn zero_evolution_is_the_gaussian() {
        let p = GcsParams::new(2.0, 0.5, 0.0).unwrap();
        for beta in [Complex64::new(0.0, 0.0), Complex64::new(1.5, 0.8), Complex64::new(-2.0, 1.0)] {
            let expect = WIGNER_BOUND * (-2.0 * (beta - 2.0).norm_sqr()).exp();
            assert!((wigner_point_closed(&p, beta, 40).unwrap() - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn kerr_cat_origin_matches_displaced_parity() {
        let p = GcsParams::from_nbar(10.0, 2.0, std::f64::consts::FRAC_PI_2).unwrap();
        let cutoff = auto_cutoff(10.0, 1e-12).unwrap();
        let closed = wigner_point_closed(&p, Complex64::new(0.0, 0.0), cutoff).unwrap();
        let oracle = wigner_point_pure(&make_gcs(&p, cutoff).unwrap(), Complex64::new(0.0, 0.0)).unwrap();
        assert!((closed - oracle).abs() < 1e-8, "{closed} vs {oracle}");
    }

    #[test]
    fn agrees_off_axis() {
        let p = GcsParams::new(1.7, 1.5, 0.9).unwrap();
        let state = make_gcs(&p, 40).unwrap();
        for beta in [Complex64::new(0.4, -1.1), Complex64::new(-2.2, 0.3), Complex64::new(1.9, 1.9)] {
            let a = wigner_point_closed(&p, beta, 40).unwrap();
            let b = wigner_point_pure(&state, beta).unwrap();
            assert!((a - b).abs() < 1e-10, "{beta}: {a} vs {b}");
        }
    }
}
