//! Scan configuration: a strict TOML schema mapped onto [`ScanSpec`].
//!
//! ```toml
//! alpha_sq = 10.0
//! epsilons = [0.5, 2.0]
//! quantity = "both"        # negativity | qfi | both
//! rescale = true
//! rel_tol = 1e-3
//! cutoff = 45              # omitted: chosen from the Poisson tail
//! tau_policy = "periodic"  # periodic | kerr, used when tau_grid is absent
//! tau_count = 400
//! refine_count = 50
//! refine_peaks = 4
//! p_grid = [0.0, 0.5, 1.0] # needs a [werner] block
//!
//! [tau_grid]
//! start = 0.01
//! stop = 6.283185307179586
//! count = 400
//!
//! [werner]
//! c = [[1.0, 0.0], [0.0, 0.0]]
//! lambdas = [1.0, -1.0]
//!
//! [output]
//! path = "scan.csv"
//! format = "csv"
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::WernerSpec;
use crate::error::{GcsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Negativity,
    Qfi,
    Both,
}

impl Quantity {
    pub fn negativity(self) -> bool {
        matches!(self, Quantity::Negativity | Quantity::Both)
    }

    pub fn qfi(self) -> bool {
        matches!(self, Quantity::Qfi | Quantity::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

/// How the `tau` window is chosen when no explicit grid is given.
///
/// `Periodic` uses `(0, 2 pi]` for integer `epsilon` and
/// `(0, 2 pi e^{-epsilon (epsilon - 1)}]` otherwise. `Kerr` keeps integer
/// exponents on `(0, 2 pi]` but widens non-integer windows to at least twice
/// the effective Kerr time, see [`kerr_time`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TauPolicy {
    #[default]
    Periodic,
    Kerr,
}

/// `count` equispaced points from `start` to `stop`, both included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl TauGrid {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        let grid = Self { start, stop, count };
        grid.validate("tau_grid")?;
        Ok(grid)
    }

    /// `(0, stop]` sampled at `stop * i / count`, `i = 1..=count`.
    pub fn half_open(stop: f64, count: usize) -> Result<Self> {
        Self::new(stop / count as f64, stop, count)
    }

    fn validate(&self, key: &str) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(GcsError::config(key, "start and stop must be finite"));
        }
        if self.start >= self.stop {
            return Err(GcsError::config(key, format!("start {} must be < stop {}", self.start, self.stop)));
        }
        if self.count < 2 {
            return Err(GcsError::config(format!("{key}.count"), "needs at least 2 points"));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.stop - self.start) / (self.count - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.stop } else { self.start + i as f64 * h })
            .collect()
    }
}

/// Atomic configuration for Werner scans: amplitudes `c_j` and the
/// eigenvalues `lambda_j` scaling the evolution, `tau_j = lambda_j tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WernerBlock {
    pub c: Vec<Complex64>,
    pub lambdas: Vec<f64>,
}

impl Default for WernerBlock {
    /// Two-level medium prepared in its upper eigenstate, eigenvalues `+-1`.
    fn default() -> Self {
        Self {
            c: vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            lambdas: vec![1.0, -1.0],
        }
    }
}

impl WernerBlock {
    pub fn spec(&self, p: f64, tau: f64) -> Result<WernerSpec> {
        WernerSpec::new(p, self.c.clone(), self.lambdas.iter().map(|l| l * tau).collect())
    }

    fn validate(&self) -> Result<()> {
        if self.lambdas.iter().any(|l| !l.is_finite()) {
            return Err(GcsError::config("werner.lambdas", "must be finite"));
        }
        self.spec(1.0, 0.0)
            .map(|_| ())
            .map_err(|e| GcsError::config("werner", e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub format: Format,
}

/// Everything a sweep needs. Thread count is deliberately absent: results do
/// not depend on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub alpha_sq: f64,
    pub epsilons: Vec<f64>,
    #[serde(default = "defaults::quantity")]
    pub quantity: Quantity,
    #[serde(default = "defaults::rescale")]
    pub rescale: bool,
    #[serde(default = "defaults::rel_tol")]
    pub rel_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    #[serde(default)]
    pub tau_policy: TauPolicy,
    #[serde(default = "defaults::tau_count")]
    pub tau_count: usize,
    #[serde(default = "defaults::refine_count")]
    pub refine_count: usize,
    #[serde(default = "defaults::refine_peaks")]
    pub refine_peaks: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_grid: Option<TauGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub werner: Option<WernerBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

pub mod defaults {
    use super::Quantity;

    pub const TAU_COUNT: usize = 400;
    pub const REFINE_COUNT: usize = 50;
    pub const REFINE_PEAKS: usize = 4;
    pub const REL_TOL: f64 = 1e-3;

    pub fn quantity() -> Quantity {
        Quantity::Both
    }
    pub fn rescale() -> bool {
        true
    }
    pub fn rel_tol() -> f64 {
        REL_TOL
    }
    pub fn tau_count() -> usize {
        TAU_COUNT
    }
    pub fn refine_count() -> usize {
        REFINE_COUNT
    }
    pub fn refine_peaks() -> usize {
        REFINE_PEAKS
    }
    /// `{0, 0.1, ..., 1}`.
    pub fn p_grid() -> Vec<f64> {
        (0..=10).map(|i| i as f64 / 10.0).collect()
    }
}

impl ScanSpec {
    /// Spec with every optional field at its default.
    pub fn new(alpha_sq: f64, epsilons: Vec<f64>) -> Self {
        Self {
            alpha_sq,
            epsilons,
            quantity: defaults::quantity(),
            rescale: defaults::rescale(),
            rel_tol: defaults::REL_TOL,
            cutoff: None,
            tau_policy: TauPolicy::default(),
            tau_count: defaults::TAU_COUNT,
            refine_count: defaults::REFINE_COUNT,
            refine_peaks: defaults::REFINE_PEAKS,
            p_grid: None,
            tau_grid: None,
            werner: None,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_sq.is_finite() && self.alpha_sq > 0.0) {
            return Err(GcsError::config("alpha_sq", format!("{} must be finite and > 0", self.alpha_sq)));
        }
        if self.epsilons.is_empty() {
            return Err(GcsError::config("epsilons", "must not be empty"));
        }
        if let Some(i) = self.epsilons.iter().position(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(GcsError::config(format!("epsilons[{i}]"), "must be finite and >= 0"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol <= 0.1) {
            return Err(GcsError::config("rel_tol", format!("{} must lie in (0, 0.1]", self.rel_tol)));
        }
        if self.tau_count < 2 {
            return Err(GcsError::config("tau_count", "needs at least 2 points"));
        }
        if self.refine_count < 2 {
            return Err(GcsError::config("refine_count", "needs at least 2 points"));
        }
        if let Some(grid) = &self.tau_grid {
            grid.validate("tau_grid")?;
        }
        if let Some(p) = &self.p_grid {
            if self.werner.is_none() {
                return Err(GcsError::config("werner", "p_grid is set but the [werner] block is missing"));
            }
            if p.is_empty() {
                return Err(GcsError::config("p_grid", "must not be empty"));
            }
            if let Some(i) = p.iter().position(|p| !(0.0..=1.0).contains(p)) {
                return Err(GcsError::config(format!("p_grid[{i}]"), "must lie in [0, 1]"));
            }
        }
        if let Some(w) = &self.werner {
            w.validate()?;
        }
        Ok(())
    }

    pub fn nbar(&self) -> f64 {
        self.alpha_sq
    }

    pub fn p_values(&self) -> Vec<f64> {
        self.p_grid.clone().unwrap_or_else(defaults::p_grid)
    }

    /// The `tau` grid scanned for exponent `epsilon`.
    pub fn tau_grid_for(&self, epsilon: f64) -> Result<TauGrid> {
        if let Some(grid) = self.tau_grid {
            return Ok(grid);
        }
        TauGrid::half_open(tau_window(epsilon, self.nbar(), self.tau_policy), self.tau_count)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| GcsError::config("<spec>", e.to_string()))
    }
}

/// `e^{epsilon (epsilon - 1)}`, the factor applied to the rescaled `tau` axis.
pub fn rescale_factor(epsilon: f64) -> f64 {
    (epsilon * (epsilon - 1.0)).exp()
}

/// Time for the quadratic part of `n^epsilon` around `nbar` to produce a
/// two-component cat, `pi / (epsilon |epsilon - 1| nbar^{epsilon - 2})`.
/// Infinite for linear evolutions.
pub fn kerr_time(epsilon: f64, nbar: f64) -> f64 {
    let curvature = epsilon * (epsilon - 1.0).abs() * nbar.powf(epsilon - 2.0);
    if curvature > 0.0 {
        PI / curvature
    } else {
        f64::INFINITY
    }
}

/// Upper end of the default `tau` window.
pub fn tau_window(epsilon: f64, nbar: f64, policy: TauPolicy) -> f64 {
    if epsilon.fract() == 0.0 {
        return 2.0 * PI;
    }
    let periodic = 2.0 * PI / rescale_factor(epsilon);
    match policy {
        TauPolicy::Periodic => periodic,
        TauPolicy::Kerr => periodic.max(2.0 * kerr_time(epsilon, nbar)),
    }
}

pub fn parse_config_str(text: &str) -> Result<ScanSpec> {
    let spec: ScanSpec = toml::from_str(text).map_err(|e| {
        let msg = e.message();
        let named = msg.starts_with("missing field") || msg.starts_with("unknown field");
        let key = match msg.split('`').nth(1) {
            Some(k) if named => k.to_owned(),
            _ => "<document>".to_owned(),
        };
        GcsError::config(key, e.to_string())
    })?;
    spec.validate()?;
    Ok(spec)
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<ScanSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| GcsError::io(path, e))?;
    parse_config_str(&text)
}
