//! Truncated Fock-space states of a single field mode.
//!
//! States are stored as amplitude vectors `c_0..=c_cutoff`. Every constructor
//! renormalizes over the represented basis; the probability mass that fell
//! beyond the cutoff is kept in [`FockState::truncation_deficit`].

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GcsError, Result};
use crate::sum::{csum, sum, ComplexNeumaier, Neumaier};

/// Tail tolerance used when a cutoff is chosen automatically.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Parameters of one generalized coherent state: real coherent amplitude
/// `alpha`, nonlinear exponent `epsilon`, and accumulated evolution `tau`
/// (coupling times atomic eigenvalue times time).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GcsParams {
    pub alpha: f64,
    pub epsilon: f64,
    pub tau: f64,
}

impl GcsParams {
    pub fn new(alpha: f64, epsilon: f64, tau: f64) -> Result<Self> {
        let params = Self {
            alpha,
            epsilon,
            tau,
        };
        params.validate()?;
        Ok(params)
    }

    /// Convenience constructor from the mean photon number.
    pub fn from_nbar(nbar: f64, epsilon: f64, tau: f64) -> Result<Self> {
        if !(nbar.is_finite() && nbar >= 0.0) {
            return Err(GcsError::domain(format!("mean photon number {nbar} must be finite and >= 0")));
        }
        Self::new(nbar.sqrt(), epsilon, tau)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(GcsError::domain(format!("alpha = {} must be finite and >= 0", self.alpha)));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(GcsError::domain(format!("epsilon = {} must be finite and >= 0", self.epsilon)));
        }
        if !self.tau.is_finite() {
            return Err(GcsError::domain(format!("tau = {} must be finite", self.tau)));
        }
        Ok(())
    }

    pub fn nbar(&self) -> f64 {
        self.alpha * self.alpha
    }

    pub fn with_tau(self, tau: f64) -> Self {
        Self { tau, ..self }
    }
}

/// `n^epsilon` with `0^0 = 1` and `0^epsilon = 0` for `epsilon > 0`.
#[inline]
pub fn phase_power(n: usize, epsilon: f64) -> f64 {
    if n == 0 {
        if epsilon == 0.0 {
            1.0
        } else {
            0.0
        }
    } else if epsilon == 0.0 {
        1.0
    } else if epsilon == 1.0 {
        n as f64
    } else if epsilon == 2.0 {
        (n * n) as f64
    } else {
        (n as f64).powf(epsilon)
    }
}

/// Smallest `N >= ceil(nbar)` with Poisson(`nbar`) mass above `N` below `tail_tol`.
pub fn auto_cutoff(nbar: f64, tail_tol: f64) -> Result<usize> {
    if !nbar.is_finite() || nbar < 0.0 {
        return Err(GcsError::domain(format!("nbar = {nbar} must be finite and >= 0")));
    }
    if !(tail_tol.is_finite() && tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(GcsError::domain(format!("tail_tol = {tail_tol} must lie in (0, 1)")));
    }
    if nbar == 0.0 {
        return Ok(0);
    }
    // Far enough out that the remaining tail is below any f64-representable tolerance.
    let horizon = (nbar + 40.0 * nbar.sqrt() + 60.0).ceil() as usize;
    let probs = poisson_probabilities(nbar, horizon);
    let floor = nbar.ceil() as usize;
    // tail[n] = mass strictly above n
    let mut tail = vec![0.0; horizon + 1];
    let mut acc = Neumaier::new();
    for n in (0..horizon).rev() {
        acc.add(probs[n + 1]);
        tail[n] = acc.total();
    }
    (floor..=horizon)
        .find(|&n| tail[n] < tail_tol)
        .ok_or_else(|| GcsError::domain(format!("no cutoff below {horizon} reaches tail {tail_tol:e}")))
}

/// Poisson probabilities `P_0..=P_cutoff` for mean `nbar`, evaluated in the log
/// domain so that neither `e^{-nbar}` nor `nbar^n / n!` leave the f64 range.
pub fn poisson_probabilities(nbar: f64, cutoff: usize) -> Vec<f64> {
    if nbar == 0.0 {
        let mut p = vec![0.0; cutoff + 1];
        p[0] = 1.0;
        return p;
    }
    let ln_nbar = nbar.ln();
    let mut log_p = -nbar;
    let mut out = Vec::with_capacity(cutoff + 1);
    for n in 0..=cutoff {
        if n > 0 {
            log_p += ln_nbar - (n as f64).ln();
        }
        out.push(log_p.exp());
    }
    out
}

/// Moduli `|<n|alpha>|` by the multiplicative recurrence
/// `|c_{n+1}| = |c_n| |alpha| / sqrt(n+1)`, carried out on logarithms.
fn coherent_moduli(alpha_abs: f64, cutoff: usize) -> Vec<f64> {
    if alpha_abs == 0.0 {
        let mut m = vec![0.0; cutoff + 1];
        m[0] = 1.0;
        return m;
    }
    let ln_alpha = alpha_abs.ln();
    let mut log_c = -0.5 * alpha_abs * alpha_abs;
    let mut out = Vec::with_capacity(cutoff + 1);
    for n in 0..=cutoff {
        if n > 0 {
            log_c += ln_alpha - 0.5 * (n as f64).ln();
        }
        out.push(log_c.exp());
    }
    out
}

/// Pure single-mode state on the truncated basis `|0>..|cutoff>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockState {
    amps: Vec<Complex64>,
    /// `1 - sum |c_n|^2` before renormalization.
    truncation_deficit: f64,
}

impl FockState {
    /// Builds a state from raw amplitudes, renormalizing them.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(GcsError::domain("amplitude vector must have at least one entry"));
        }
        if amps.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(GcsError::domain("amplitudes must be finite"));
        }
        let norm_sq = sum(amps.iter().map(|c| c.norm_sqr()));
        if norm_sq == 0.0 {
            return Err(GcsError::domain("amplitude vector has zero norm"));
        }
        let mut state = Self {
            amps,
            truncation_deficit: 1.0 - norm_sq,
        };
        state.rescale(norm_sq);
        Ok(state)
    }

    fn rescale(&mut self, norm_sq: f64) {
        let scale = norm_sq.sqrt().recip();
        for c in &mut self.amps {
            *c *= scale;
        }
    }

    pub fn vacuum(cutoff: usize) -> Self {
        Self::number(0, cutoff).expect("0 <= cutoff")
    }

    /// Number state `|n>` on a basis of size `cutoff + 1`.
    pub fn number(n: usize, cutoff: usize) -> Result<Self> {
        if n > cutoff {
            return Err(GcsError::domain(format!("number state |{n}> exceeds cutoff {cutoff}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); cutoff + 1];
        amps[n] = Complex64::new(1.0, 0.0);
        Ok(Self {
            amps,
            truncation_deficit: 0.0,
        })
    }

    /// Coherent state with complex amplitude `alpha`.
    pub fn coherent(alpha: Complex64, cutoff: usize) -> Result<Self> {
        if !(alpha.re.is_finite() && alpha.im.is_finite()) {
            return Err(GcsError::domain("coherent amplitude must be finite"));
        }
        let moduli = coherent_moduli(alpha.norm(), cutoff);
        let phase = Complex64::from_polar(1.0, alpha.arg());
        let mut rot = Complex64::new(1.0, 0.0);
        let amps = moduli
            .into_iter()
            .map(|m| {
                let c = rot * m;
                rot *= phase;
                c
            })
            .collect();
        Self::from_amplitudes(amps)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn cutoff(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn truncation_deficit(&self) -> f64 {
        self.truncation_deficit
    }

    pub fn norm_sqr(&self) -> f64 {
        sum(self.amps.iter().map(|c| c.norm_sqr()))
    }

    /// Photon-number distribution `|c_n|^2`.
    pub fn populations(&self) -> Vec<f64> {
        self.amps.iter().map(|c| c.norm_sqr()).collect()
    }

    /// `sum_n n^m |c_n|^2`.
    pub fn photon_moment(&self, m: u32) -> Result<f64> {
        if m == 0 {
            return Err(GcsError::domain("moment order must be >= 1"));
        }
        Ok(sum(self
            .amps
            .iter()
            .enumerate()
            .map(|(n, c)| (n as f64).powi(m as i32) * c.norm_sqr())))
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.photon_moment(1).expect("order 1")
    }

    /// Mandel `Q = (<n^2> - <n>^2 - <n>) / <n>`.
    pub fn mandel_q(&self) -> Result<f64> {
        let n1 = self.mean_photon_number();
        if n1 <= 0.0 {
            return Err(GcsError::UndefinedStatistic("Mandel Q of the vacuum"));
        }
        // <n(n-1)> avoids the cancellation in <n^2> - <n>.
        let falling = self.factorial_moment(2);
        Ok((falling - n1 * n1) / n1)
    }

    fn factorial_moment(&self, k: usize) -> f64 {
        sum(self.amps.iter().enumerate().skip(k).map(|(n, c)| {
            let f: f64 = (0..k).map(|j| (n - j) as f64).product();
            f * c.norm_sqr()
        }))
    }

    /// Normalized factorial-moment correlation `<n(n-1)..(n-k+1)> / <n>^k`.
    pub fn g_k(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Err(GcsError::domain("correlation order must be >= 1"));
        }
        if k > self.cutoff() {
            return Err(GcsError::domain(format!(
                "correlation order {k} exceeds cutoff {}",
                self.cutoff()
            )));
        }
        let n1 = self.mean_photon_number();
        if n1 <= 0.0 {
            return Err(GcsError::UndefinedStatistic("g^(k) of the vacuum"));
        }
        Ok(self.factorial_moment(k) / n1.powi(k as i32))
    }

    pub fn ladder_expectations(&self) -> LadderMoments {
        let c = &self.amps;
        let a_mean = csum(
            (0..c.len().saturating_sub(1)).map(|n| c[n].conj() * c[n + 1] * ((n + 1) as f64).sqrt()),
        );
        let a2_mean = csum((0..c.len().saturating_sub(2)).map(|n| {
            c[n].conj() * c[n + 2] * (((n + 1) * (n + 2)) as f64).sqrt()
        }));
        LadderMoments {
            a_mean,
            a2_mean,
            n_mean: self.mean_photon_number(),
        }
    }

    /// Variance of `X_phi = a e^{i phi} + a^dag e^{-i phi}` (vacuum variance 1).
    pub fn quadrature_variance(&self, angle: f64) -> f64 {
        self.ladder_expectations().quadrature_variance(angle)
    }

    /// `<self|other>`, zero-padding the shorter state.
    pub fn inner(&self, other: &FockState) -> Complex64 {
        let mut acc = ComplexNeumaier::new();
        for (a, b) in self.amps.iter().zip(&other.amps) {
            acc.add(a.conj() * b);
        }
        acc.total()
    }

    pub fn fidelity(&self, other: &FockState) -> f64 {
        self.inner(other).norm_sqr()
    }
}

/// First and second ladder-operator moments plus the mean photon number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderMoments {
    pub a_mean: Complex64,
    pub a2_mean: Complex64,
    pub n_mean: f64,
}

impl LadderMoments {
    /// `<a^2> - <a>^2`, the phase-sensitive part of the quadrature covariance.
    pub fn anomalous_variance(&self) -> Complex64 {
        self.a2_mean - self.a_mean * self.a_mean
    }

    /// `<n> - |<a>|^2`.
    pub fn normal_variance(&self) -> f64 {
        self.n_mean - self.a_mean.norm_sqr()
    }

    pub fn quadrature_variance(&self, angle: f64) -> f64 {
        let rot = Complex64::from_polar(1.0, 2.0 * angle);
        1.0 + 2.0 * (rot * self.anomalous_variance()).re + 2.0 * self.normal_variance()
    }
}

/// Generalized coherent state: `c_n = <n|alpha> exp(-i tau n^epsilon)`.
pub fn make_gcs(params: &GcsParams, cutoff: usize) -> Result<FockState> {
    params.validate()?;
    let recommended = auto_cutoff(params.nbar(), DEFAULT_TAIL_TOL)?;
    if cutoff < recommended {
        log::warn!(
            "cutoff {cutoff} below recommended {recommended} for nbar = {}",
            params.nbar()
        );
    }
    let moduli = coherent_moduli(params.alpha, cutoff);
    let amps = moduli
        .into_iter()
        .enumerate()
        .map(|(n, m)| Complex64::from_polar(m, -params.tau * phase_power(n, params.epsilon)))
        .collect();
    FockState::from_amplitudes(amps)
}

/// [`make_gcs`] with the cutoff picked by [`auto_cutoff`] at [`DEFAULT_TAIL_TOL`].
pub fn make_gcs_auto(params: &GcsParams) -> Result<FockState> {
    make_gcs(params, auto_cutoff(params.nbar(), DEFAULT_TAIL_TOL)?)
}

/// `(e^{-i pi/4}|alpha> + e^{i pi/4}|-alpha>) / sqrt 2` on the truncated basis.
pub fn yurke_stoler_cat(alpha: f64, cutoff: usize) -> Result<FockState> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(GcsError::domain(format!("alpha = {alpha} must be finite and >= 0")));
    }
    let minus = Complex64::from_polar(1.0, -FRAC_PI_4);
    let plus = Complex64::from_polar(1.0, FRAC_PI_4);
    let amps = coherent_moduli(alpha, cutoff)
        .into_iter()
        .enumerate()
        .map(|(n, m)| {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            (minus + plus * sign) * (m / std::f64::consts::SQRT_2)
        })
        .collect();
    FockState::from_amplitudes(amps)
}
