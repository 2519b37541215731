//! Displacement sensing with pure field states.
//!
//! For a pure state the quantum Fisher information for a small phase-space
//! displacement along direction `theta` is four times the variance of the
//! quadrature orthogonal to it, `F = 4 Var[X_{theta + pi/2}]`, with the
//! convention `X_phi = a e^{i phi} + a^dag e^{-i phi}` (vacuum variance 1).

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{GcsError, Result};
use crate::fock::{auto_cutoff, phase_power, poisson_probabilities, FockState, GcsParams, DEFAULT_TAIL_TOL};
use crate::sum::{csum, sum};

/// Below this `|<a^2> - <a>^2|` every displacement direction is equivalent.
const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QfiReport {
    pub qfi: f64,
    /// Displacement direction in `[0, pi)` reaching `qfi`.
    pub best_angle: f64,
    /// Orthogonal-quadrature variance, `qfi / 4`.
    pub variance: f64,
    /// No preferred direction: the maximum is reached for every angle.
    pub degenerate: bool,
}

/// `<z_j>_alpha = sum_n P_n(alpha^2) exp(-i tau ((n+j)^eps - n^eps))`.
pub fn z_moment(params: &GcsParams, j: usize) -> Result<Complex64> {
    params.validate()?;
    if j == 0 {
        return Err(GcsError::domain("z moment order must be >= 1"));
    }
    let cutoff = auto_cutoff(params.nbar(), DEFAULT_TAIL_TOL)?;
    let probs = poisson_probabilities(params.nbar(), cutoff);
    let norm = sum(probs.iter().copied());
    Ok(csum(probs.iter().enumerate().map(|(n, p)| {
        let gap = phase_power(n + j, params.epsilon) - phase_power(n, params.epsilon);
        Complex64::from_polar(p / norm, -params.tau * gap)
    })))
}

/// The literal closed form `4 nbar (<Re[z_2]^2> - <Re[z_1]>^2) + 1`, with the
/// square taken inside the first average.
///
/// Kept for comparison only. Read literally it does not reduce to the
/// coherent value 1 for `epsilon = 1` (it gives `1 + 4 nbar (cos^2 2tau -
/// cos^2 tau)`), so [`qfi_max`] and [`qfi_direction`] never use it.
pub fn variance_literal_form(params: &GcsParams) -> Result<f64> {
    params.validate()?;
    let cutoff = auto_cutoff(params.nbar(), DEFAULT_TAIL_TOL)?;
    let probs = poisson_probabilities(params.nbar(), cutoff);
    let norm = sum(probs.iter().copied());
    let re_z = |n: usize, j: usize| {
        let gap = phase_power(n + j, params.epsilon) - phase_power(n, params.epsilon);
        (params.tau * gap).cos()
    };
    let mean_sq = sum(probs.iter().enumerate().map(|(n, p)| p / norm * re_z(n, 2).powi(2)));
    let mean = sum(probs.iter().enumerate().map(|(n, p)| p / norm * re_z(n, 1)));
    Ok(4.0 * params.nbar() * (mean_sq - mean * mean) + 1.0)
}

/// `4 Var[X_{angle + pi/2}]`.
pub fn qfi_direction(state: &FockState, displacement_angle: f64) -> f64 {
    4.0 * state.quadrature_variance(displacement_angle + FRAC_PI_2)
}

/// Fisher information maximized over the displacement direction.
///
/// `max_phi Var[X_phi] = 1 + 2 |<a^2> - <a>^2| + 2 (<n> - |<a>|^2)`, reached
/// when `2 phi = -arg(<a^2> - <a>^2)`; the displacement is orthogonal to it.
pub fn qfi_max(state: &FockState) -> QfiReport {
    let m = state.ladder_expectations();
    let anomalous = m.anomalous_variance();
    let variance = 1.0 + 2.0 * anomalous.norm() + 2.0 * m.normal_variance();
    let degenerate = anomalous.norm() <= DEGENERACY_TOL;
    let best_angle = if degenerate {
        0.0
    } else {
        let quadrature = -0.5 * anomalous.arg();
        (quadrature - FRAC_PI_2).rem_euclid(PI)
    };
    QfiReport {
        qfi: 4.0 * variance,
        best_angle,
        variance,
        degenerate,
    }
}

/// Largest Fisher information a state with mean photon number `nbar` reaches
/// under nonlinear evolution, `4 (4 nbar + 1)`.
pub fn qfi_ceiling(nbar: f64) -> f64 {
    4.0 * (4.0 * nbar + 1.0)
}

/// `qfi_max / (4 (4 nbar + 1))`.
pub fn normalized_qfi(state: &FockState, nbar: f64) -> Result<f64> {
    if !(nbar.is_finite() && nbar > 0.0) {
        return Err(GcsError::domain(format!("nbar = {nbar} must be finite and > 0")));
    }
    Ok(qfi_max(state).qfi / qfi_ceiling(nbar))
}

/// Cramer-Rao bound `1 / sqrt(nbar F)` on the displacement uncertainty.
pub fn cramer_rao(qfi: f64, nbar: f64) -> Result<f64> {
    if !(qfi.is_finite() && qfi > 0.0) || !(nbar.is_finite() && nbar > 0.0) {
        return Err(GcsError::domain(format!(
            "Cramer-Rao bound needs positive qfi and nbar (got {qfi}, {nbar})"
        )));
    }
    Ok(1.0 / (nbar * qfi).sqrt())
}

/// Squeezing in dB that would give the same Fisher information, `-10 log10(4 nbar + 1)`.
pub fn squeezing_equivalent_db(nbar: f64) -> Result<f64> {
    if !(nbar.is_finite() && nbar >= 0.0) {
        return Err(GcsError::domain(format!("nbar = {nbar} must be finite and >= 0")));
    }
    Ok(-10.0 * (4.0 * nbar + 1.0).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::make_gcs;

    #[test]
    fn z_moments_of_linear_evolutions() {
        let tau = 0.77;
        let z = z_moment(&GcsParams::from_nbar(10.0, 1.0, tau).unwrap(), 1).unwrap();
        assert!((z - Complex64::from_polar(1.0, -tau)).norm() < 1e-12);
        let z = z_moment(&GcsParams::from_nbar(10.0, 0.0, tau).unwrap(), 2).unwrap();
        assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn literal_variance_trivial_cases() {
        for tau in [0.0, 0.4, 2.0] {
            let v = variance_literal_form(&GcsParams::from_nbar(10.0, 0.0, tau).unwrap()).unwrap();
            assert!((v - 1.0).abs() < 1e-12);
        }
        for eps in [0.5, 2.0, 3.0] {
            let v = variance_literal_form(&GcsParams::from_nbar(10.0, eps, 0.0).unwrap()).unwrap();
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn literal_variance_departs_from_coherent_at_linear_evolution() {
        let tau: f64 = 0.9;
        let v = variance_literal_form(&GcsParams::from_nbar(10.0, 1.0, tau).unwrap()).unwrap();
        let literal = 1.0 + 40.0 * ((2.0 * tau).cos().powi(2) - tau.cos().powi(2));
        assert!((v - literal).abs() < 1e-10);
        let state = make_gcs(&GcsParams::from_nbar(10.0, 1.0, tau).unwrap(), 45).unwrap();
        assert!((state.quadrature_variance(0.3) - 1.0).abs() < 1e-9);
        assert!((v - 1.0).abs() > 1.0);
    }

    #[test]
    fn reference_fisher_information() {
        let coh = FockState::coherent(Complex64::new(2.0, 1.0), 50).unwrap();
        let fock = FockState::number(3, 5).unwrap();
        for k in 0..6 {
            let th = k as f64 * 0.5;
            assert!((qfi_direction(&coh, th) - 4.0).abs() < 1e-9);
            assert!((qfi_direction(&fock, th) - 28.0).abs() < 1e-12);
        }
        let report = qfi_max(&coh);
        assert!(report.degenerate);
        assert!((report.qfi - 4.0).abs() < 1e-9);
        assert_eq!(report.qfi, 4.0 * report.variance);
    }

    #[test]
    fn best_angle_reaches_the_maximum() {
        let s = make_gcs(&GcsParams::from_nbar(10.0, 2.0, 0.05).unwrap(), 45).unwrap();
        let r = qfi_max(&s);
        assert!(!r.degenerate);
        assert!((0.0..PI).contains(&r.best_angle));
        assert!((qfi_direction(&s, r.best_angle) - r.qfi).abs() < 1e-9 * r.qfi);
    }

    #[test]
    fn arithmetic_helpers() {
        assert!((cramer_rao(4.0, 10.0).unwrap() - 1.0 / 40f64.sqrt()).abs() < 1e-15);
        assert!((cramer_rao(164.0, 10.0).unwrap() - 0.024693).abs() < 1e-6);
        assert!(cramer_rao(0.0, 10.0).is_err());
        assert!(cramer_rao(4.0, -1.0).is_err());
        assert_eq!(squeezing_equivalent_db(0.0).unwrap(), 0.0);
        assert!((squeezing_equivalent_db(10.0).unwrap() + 16.128).abs() < 1e-3);
        assert!((squeezing_equivalent_db(8.0).unwrap() + 15.185).abs() < 1e-3);
        assert!(squeezing_equivalent_db(-1.0).is_err());
        let coh = FockState::coherent(Complex64::new(10f64.sqrt(), 0.0), 50).unwrap();
        assert!((normalized_qfi(&coh, 10.0).unwrap() - 4.0 / 164.0).abs() < 1e-9);
        assert!(normalized_qfi(&coh, 0.0).is_err());
    }
}
