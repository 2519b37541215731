//! Field states induced by a Werner-mixed atomic medium.
//!
//! An atomic state `p |Psi><Psi| + (1-p) 1/d`, with `|Psi> = sum_j c_j |lambda_j>`
//! written in the eigenbasis of the coupled atomic operator, leaves the field in
//! the mixture `sum_j w_j |GCS(tau_j)><GCS(tau_j)|` with
//! `w_j = p |c_j|^2 + (1-p)/d`. Coherences between different `j` drop out of
//! the reduced field state because the atomic eigenstates are orthogonal, so
//! they are never built.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GcsError, Result};
use crate::fock::{make_gcs, FockState, GcsParams};
use crate::sum::{sum, Neumaier};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WernerSpec {
    /// Mixing parameter: 0 is maximally mixed, 1 is pure.
    pub p: f64,
    /// Pure-component amplitudes `c_j` over the `d` atomic eigenstates.
    pub c: Vec<Complex64>,
    /// Evolution parameter `tau_j` accumulated by the field for eigenstate `j`.
    pub taus: Vec<f64>,
}

impl WernerSpec {
    pub fn new(p: f64, c: Vec<Complex64>, taus: Vec<f64>) -> Result<Self> {
        let spec = Self { p, c, taus };
        spec.validate()?;
        Ok(spec)
    }

    pub fn d(&self) -> usize {
        self.c.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(GcsError::domain(format!("Werner parameter p = {} outside [0, 1]", self.p)));
        }
        if self.c.len() < 2 {
            return Err(GcsError::domain("atomic dimension d must be >= 2"));
        }
        if self.c.len() != self.taus.len() {
            return Err(GcsError::domain(format!(
                "{} amplitudes but {} evolution parameters",
                self.c.len(),
                self.taus.len()
            )));
        }
        if self.taus.iter().any(|t| !t.is_finite()) {
            return Err(GcsError::domain("evolution parameters must be finite"));
        }
        let norm = sum(self.c.iter().map(|c| c.norm_sqr()));
        if (norm - 1.0).abs() > 1e-12 {
            return Err(GcsError::domain(format!("sum |c_j|^2 = {norm} is not 1")));
        }
        Ok(())
    }
}

/// `w_j = p |c_j|^2 + (1-p)/d`, written as `1/d + p (|c_j|^2 - 1/d)` so that
/// uniform populations give exactly `1/d` for every `p`.
pub fn werner_weights(spec: &WernerSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let inv_d = 1.0 / spec.d() as f64;
    Ok(spec
        .c
        .iter()
        .map(|c| inv_d + spec.p * (c.norm_sqr() - inv_d))
        .collect())
}

/// `Tr rho_a^2 = p^2 + 2p(1-p)/d + (1-p)^2/d`.
pub fn atomic_purity(spec: &WernerSpec) -> Result<f64> {
    spec.validate()?;
    let p = spec.p;
    let d = spec.d() as f64;
    Ok(p * p + 2.0 * p * (1.0 - p) / d + (1.0 - p) * (1.0 - p) / d)
}

/// Weighted collection of pure field states.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    components: Vec<(f64, FockState)>,
}

impl Ensemble {
    pub fn new(components: Vec<(f64, FockState)>) -> Result<Self> {
        if components.is_empty() {
            return Err(GcsError::domain("ensemble needs at least one component"));
        }
        if components.iter().any(|(w, _)| !(w.is_finite() && *w >= 0.0)) {
            return Err(GcsError::domain("ensemble weights must be finite and >= 0"));
        }
        let total = sum(components.iter().map(|(w, _)| *w));
        if (total - 1.0).abs() > 1e-12 {
            return Err(GcsError::domain(format!("ensemble weights sum to {total}")));
        }
        if let Some((_, s)) = components.iter().find(|(_, s)| (s.norm_sqr() - 1.0).abs() > 1e-12) {
            return Err(GcsError::domain(format!(
                "ensemble member has norm^2 {}",
                s.norm_sqr()
            )));
        }
        Ok(Self { components })
    }

    pub fn pure(state: FockState) -> Self {
        Self {
            components: vec![(1.0, state)],
        }
    }

    pub fn components(&self) -> &[(f64, FockState)] {
        &self.components
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.components.iter().map(|(w, _)| *w)
    }

    pub fn max_cutoff(&self) -> usize {
        self.components.iter().map(|(_, s)| s.cutoff()).max().unwrap_or(0)
    }

    /// `sum_j w_j <n^m>_j`.
    pub fn photon_moment(&self, m: u32) -> Result<f64> {
        let mut acc = Neumaier::new();
        for (w, s) in &self.components {
            acc.add(w * s.photon_moment(m)?);
        }
        Ok(acc.total())
    }

    /// Mean orthogonal-quadrature variance of the mixture, `Var_rho[X_phi]`.
    ///
    /// Reported as a descriptive statistic; it is not a Fisher information
    /// for the mixed state.
    pub fn quadrature_variance(&self, angle: f64) -> f64 {
        let rot1 = Complex64::from_polar(1.0, angle);
        let rot2 = rot1 * rot1;
        let mut second = Neumaier::new();
        let mut first = Neumaier::new();
        for (w, s) in &self.components {
            let m = s.ladder_expectations();
            // <X^2> = 2 Re(e^{2i phi} <a^2>) + 2 <n> + 1, <X> = 2 Re(e^{i phi} <a>)
            second.add(w * (2.0 * (rot2 * m.a2_mean).re + 2.0 * m.n_mean + 1.0));
            first.add(w * 2.0 * (rot1 * m.a_mean).re);
        }
        let mean = first.total();
        second.total() - mean * mean
    }
}

/// Field mixture left by the Werner medium after evolution with exponent `epsilon`.
pub fn evolve_werner(spec: &WernerSpec, alpha: f64, epsilon: f64, cutoff: usize) -> Result<Ensemble> {
    let weights = werner_weights(spec)?;
    let components = weights
        .into_iter()
        .zip(&spec.taus)
        .map(|(w, &tau)| Ok((w, make_gcs(&GcsParams::new(alpha, epsilon, tau)?, cutoff)?)))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(components)
}

pub fn ensemble_photon_moment(e: &Ensemble, m: u32) -> Result<f64> {
    e.photon_moment(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockState;

    fn real(xs: &[f64]) -> Vec<Complex64> {
        xs.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn weights_at_the_endpoints() {
        let c = vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        let pure = WernerSpec::new(1.0, c.clone(), vec![0.1, -0.1]).unwrap();
        let w = werner_weights(&pure).unwrap();
        assert!((w[0] - 0.36).abs() < 1e-15 && (w[1] - 0.64).abs() < 1e-15);

        let mixed = WernerSpec::new(0.0, real(&[0.5, 0.5, 0.5, 0.5]), vec![0.0; 4]).unwrap();
        assert_eq!(werner_weights(&mixed).unwrap(), vec![0.25; 4]);

        let half = WernerSpec::new(0.5, real(&[1.0, 0.0]), vec![0.3, -0.3]).unwrap();
        assert_eq!(werner_weights(&half).unwrap(), vec![0.75, 0.25]);
    }

    #[test]
    fn weights_reject_bad_p() {
        let spec = WernerSpec {
            p: 1.5,
            c: real(&[1.0, 0.0]),
            taus: vec![0.0, 0.0],
        };
        assert!(werner_weights(&spec).is_err());
        assert!(WernerSpec::new(0.5, real(&[1.0, 0.0]), vec![0.0]).is_err());
        assert!(WernerSpec::new(0.5, real(&[1.0, 1.0]), vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn purity_closed_form() {
        let spec = |p| WernerSpec::new(p, real(&[1.0, 0.0]), vec![0.0, 0.0]).unwrap();
        assert_eq!(atomic_purity(&spec(1.0)).unwrap(), 1.0);
        assert_eq!(atomic_purity(&spec(0.0)).unwrap(), 0.5);
        assert_eq!(atomic_purity(&spec(0.5)).unwrap(), 0.625);
    }

    #[test]
    fn equal_taus_give_identical_members() {
        let spec = WernerSpec::new(0.3, real(&[0.6, 0.8]), vec![0.7, 0.7]).unwrap();
        let e = evolve_werner(&spec, 2.0, 1.5, 40).unwrap();
        let (a, b) = (&e.components()[0].1, &e.components()[1].1);
        assert!((a.fidelity(b) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ensemble_moments_are_weighted() {
        let s = FockState::coherent(Complex64::new(3.0, 0.0), 60).unwrap();
        let e = Ensemble::new(vec![(0.5, s.clone()), (0.5, s.clone())]).unwrap();
        assert!((e.photon_moment(2).unwrap() - 90.0).abs() < 1e-8);
        let single = Ensemble::pure(s.clone());
        assert_eq!(single.photon_moment(3).unwrap(), s.photon_moment(3).unwrap());
    }

    #[test]
    fn ensemble_validation() {
        let s = FockState::vacuum(2);
        assert!(Ensemble::new(vec![]).is_err());
        assert!(Ensemble::new(vec![(0.7, s.clone())]).is_err());
        assert!(Ensemble::new(vec![(-0.5, s.clone()), (1.5, s)]).is_err());
    }

    #[test]
    fn mixture_variance_of_opposite_coherent_states() {
        // |a><a|/2 + |-a><-a|/2 has X_0 variance 1 + 4 a^2
        let a = 1.5;
        let plus = FockState::coherent(Complex64::new(a, 0.0), 50).unwrap();
        let minus = FockState::coherent(Complex64::new(-a, 0.0), 50).unwrap();
        let e = Ensemble::new(vec![(0.5, plus), (0.5, minus)]).unwrap();
        assert!((e.quadrature_variance(0.0) - (1.0 + 4.0 * a * a)).abs() < 1e-10);
        assert!((e.quadrature_variance(std::f64::consts::FRAC_PI_2) - 1.0).abs() < 1e-10);
    }
}
