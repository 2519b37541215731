//! Wigner functions on phase space.
//!
//! Phase-space points are complex amplitudes `beta`; a coherent state `|alpha>`
//! has its Gaussian peak `(2/pi) exp(-2|beta - alpha|^2)` at `beta = alpha`.
//!
//! The generic evaluator uses the displaced-parity form
//!
//! `W(beta) = (2/pi) sum_{m,n} rho_{nm} (-1)^n <m|D(2 beta)|n>`
//!
//! with the displacement matrix elements built from [`DisplacementKernel`].
//! [`closed`] evaluates the explicit double series for generalized coherent
//! states independently of that kernel.

pub mod closed;
pub mod laguerre;
pub mod negativity;

use std::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::Ensemble;
use crate::error::{GcsError, Result};
use crate::fock::FockState;
use crate::sum::Neumaier;

pub use closed::wigner_point_closed;
pub use laguerre::{laguerre_assoc, laguerre_column, DisplacementKernel};
pub use negativity::{
    fock_negativity, fock_reference, negativity, normalized_negativity, NegativityEstimate, PolarQuadrature,
    NEGATIVITY_TAIL_TOL,
};

/// Imaginary parts below this are rounding noise and dropped silently.
const RESIDUE_QUIET: f64 = 1e-10;
/// Imaginary parts above this mean the evaluation cannot be trusted.
const RESIDUE_FATAL: f64 = 1e-8;

/// Anything whose Wigner function can be evaluated.
#[derive(Debug, Clone, Copy)]
pub enum Source<'a> {
    Pure(&'a FockState),
    Mixture(&'a Ensemble),
}

impl<'a> From<&'a FockState> for Source<'a> {
    fn from(s: &'a FockState) -> Self {
        Source::Pure(s)
    }
}

impl<'a> From<&'a Ensemble> for Source<'a> {
    fn from(e: &'a Ensemble) -> Self {
        Source::Mixture(e)
    }
}

impl Source<'_> {
    pub fn cutoff(&self) -> usize {
        match self {
            Source::Pure(s) => s.cutoff(),
            Source::Mixture(e) => e.max_cutoff(),
        }
    }

    /// Largest `|<a>|` over the members; used to size default grids.
    pub fn displacement_scale(&self) -> f64 {
        match self {
            Source::Pure(s) => s.mean_photon_number().sqrt(),
            Source::Mixture(e) => e
                .components()
                .iter()
                .map(|(_, s)| s.mean_photon_number().sqrt())
                .fold(0.0, f64::max),
        }
    }

    pub fn bands(&self) -> DensityBands {
        match self {
            Source::Pure(s) => DensityBands::from_pure(s),
            Source::Mixture(e) => DensityBands::from_ensemble(e),
        }
    }
}

/// Signed density-matrix bands `B_k[n] = (-1)^n rho_{n,n+k}` laid out like
/// [`DisplacementKernel`], so that
///
/// `W(r e^{i phi}) = (2/pi) Re sum_k w_k e^{i k phi} sum_n B_k[n] f_n^k(4 r^2)`
///
/// with `w_0 = 1` and `w_k = 2` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityBands {
    cutoff: usize,
    data: Vec<Complex64>,
}

impl DensityBands {
    fn zeros(cutoff: usize) -> Self {
        Self {
            cutoff,
            data: vec![Complex64::new(0.0, 0.0); (cutoff + 1) * (cutoff + 2) / 2],
        }
    }

    fn accumulate(&mut self, weight: f64, amps: &[Complex64]) {
        let mut off = 0;
        for k in 0..=self.cutoff {
            for n in 0..=(self.cutoff - k) {
                if n + k < amps.len() {
                    let sign = if n % 2 == 0 { weight } else { -weight };
                    self.data[off + n] += amps[n] * amps[n + k].conj() * sign;
                }
            }
            off += self.cutoff + 1 - k;
        }
    }

    pub fn from_pure(state: &FockState) -> Self {
        let mut bands = Self::zeros(state.cutoff());
        bands.accumulate(1.0, state.amplitudes());
        bands
    }

    pub fn from_ensemble(e: &Ensemble) -> Self {
        let mut bands = Self::zeros(e.max_cutoff());
        for (w, s) in e.components() {
            bands.accumulate(*w, s.amplitudes());
        }
        bands
    }

    /// Weighted combination of bands sharing one cutoff.
    pub fn combine(parts: &[(f64, &DensityBands)]) -> Self {
        let cutoff = parts.iter().map(|(_, b)| b.cutoff).max().unwrap_or(0);
        let mut out = Self::zeros(cutoff);
        for (w, b) in parts {
            assert_eq!(b.cutoff, cutoff, "bands must share a cutoff");
            for (o, v) in out.data.iter_mut().zip(&b.data) {
                *o += v * w;
            }
        }
        out
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Per-harmonic radial coefficients `C_k = sum_n B_k[n] f_n^k`.
    pub(crate) fn harmonics(&self, kernel_values: &[f64], out: &mut [Complex64]) {
        let mut off = 0;
        for (k, slot) in out.iter_mut().enumerate().take(self.cutoff + 1) {
            let len = self.cutoff + 1 - k;
            let mut re = 0.0;
            let mut im = 0.0;
            for (b, f) in self.data[off..off + len].iter().zip(&kernel_values[off..off + len]) {
                re += b.re * f;
                im += b.im * f;
            }
            *slot = Complex64::new(re, im);
            off += len;
        }
    }
}

/// Evaluates `W` at `beta` from precomputed bands.
pub(crate) fn eval_bands(bands: &DensityBands, kernel: &DisplacementKernel, scratch: &mut Scratch, beta: Complex64) -> f64 {
    let x = 4.0 * beta.norm_sqr();
    kernel.fill(x, &mut scratch.kernel);
    bands.harmonics(&scratch.kernel, &mut scratch.harmonics);
    let step = if beta.norm_sqr() > 0.0 {
        beta / beta.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mut rot = Complex64::new(1.0, 0.0);
    let mut acc = scratch.harmonics[0].re;
    for c in &scratch.harmonics[1..] {
        rot *= step;
        acc += 2.0 * (c * rot).re;
    }
    FRAC_2_PI * acc
}

pub(crate) struct Scratch {
    kernel: Vec<f64>,
    harmonics: Vec<Complex64>,
}

impl Scratch {
    pub(crate) fn new(kernel: &DisplacementKernel) -> Self {
        Self {
            kernel: vec![0.0; kernel.len()],
            harmonics: vec![Complex64::new(0.0, 0.0); kernel.cutoff() + 1],
        }
    }
}

/// Displaced-parity evaluation of a pure state's Wigner function.
///
/// Both triangles `m > n` and `m < n` of the double sum are accumulated
/// separately; the imaginary part of the total must vanish.
pub fn wigner_point_pure(state: &FockState, beta: Complex64) -> Result<f64> {
    let kernel = DisplacementKernel::new(state.cutoff());
    let f = kernel.evaluate(4.0 * beta.norm_sqr());
    let c = state.amplitudes();
    let unit = if beta.norm_sqr() > 0.0 {
        beta / beta.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mut re = Neumaier::new();
    let mut im = Neumaier::new();
    let mut up = Complex64::new(1.0, 0.0);
    for k in 0..=state.cutoff() {
        let off = kernel.band_offset(k);
        let mut upper = Complex64::new(0.0, 0.0);
        let mut lower = Complex64::new(0.0, 0.0);
        for n in 0..=(state.cutoff() - k) {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            // <n+k|D|n> = e^{ik phi} f, <n|D|n+k> = (-e^{-i phi})^k f
            upper += c[n + k].conj() * c[n] * (sign * f[off + n]);
            if k > 0 {
                lower += c[n].conj() * c[n + k] * (sign * f[off + n]);
            }
        }
        let total = if k == 0 {
            upper
        } else {
            upper * up + lower * up.conj()
        };
        re.add(total.re);
        im.add(total.im);
        up *= unit;
    }
    let value = FRAC_2_PI * re.total();
    let residue = (FRAC_2_PI * im.total()).abs();
    if residue > RESIDUE_FATAL {
        return Err(GcsError::NumericalConsistency {
            re: beta.re,
            im: beta.im,
            residue,
        });
    }
    if residue > RESIDUE_QUIET {
        log::warn!("Wigner imaginary residue {residue:e} at {beta}");
    }
    Ok(value)
}

/// Square sampling window `[-L, L]^2` of the `beta` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    #[serde(rename = "L")]
    pub half_width: f64,
    pub nx: usize,
    pub ny: usize,
}

impl PhaseGrid {
    pub const DEFAULT_POINTS: usize = 301;

    pub fn new(half_width: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(GcsError::domain(format!("grid half-width {half_width} must be > 0")));
        }
        if nx < 2 || ny < 2 {
            return Err(GcsError::domain("grid needs at least 2 points per axis"));
        }
        Ok(Self { half_width, nx, ny })
    }

    pub fn square(half_width: f64, n: usize) -> Result<Self> {
        Self::new(half_width, n, n)
    }

    /// Default window for a state of amplitude `alpha` on `cutoff` levels:
    /// `L = alpha + 5 + sqrt(cutoff)/2` with 301 points per axis.
    pub fn for_state(alpha: f64, cutoff: usize) -> Self {
        Self {
            half_width: default_half_width(alpha, cutoff),
            nx: Self::DEFAULT_POINTS,
            ny: Self::DEFAULT_POINTS,
        }
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        2.0 * self.half_width / (self.ny - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.dy()
    }

    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.x(i), self.y(j))
    }
}

pub fn default_half_width(alpha: f64, cutoff: usize) -> f64 {
    alpha + 5.0 + 0.5 * (cutoff as f64).sqrt()
}

/// Samples of `W` on a [`PhaseGrid`], row-major: `values[j * nx + i] = W(x_i + i y_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerField {
    pub grid: PhaseGrid,
    pub values: Vec<f64>,
}

impl WignerField {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx + i]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Location of the largest sample.
    pub fn argmax(&self) -> Complex64 {
        let (idx, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
        self.grid.point(idx % self.grid.nx, idx / self.grid.nx)
    }

    /// Bilinear interpolation; zero outside the window.
    pub fn interpolate(&self, beta: Complex64) -> f64 {
        let g = &self.grid;
        let fx = (beta.re + g.half_width) / g.dx();
        let fy = (beta.im + g.half_width) / g.dy();
        if fx < 0.0 || fy < 0.0 || fx > (g.nx - 1) as f64 || fy > (g.ny - 1) as f64 {
            return 0.0;
        }
        let i = (fx.floor() as usize).min(g.nx - 2);
        let j = (fy.floor() as usize).min(g.ny - 2);
        let tx = fx - i as f64;
        let ty = fy - j as f64;
        let v00 = self.at(i, j);
        let v10 = self.at(i + 1, j);
        let v01 = self.at(i, j + 1);
        let v11 = self.at(i + 1, j + 1);
        (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11)
    }
}

fn pure_field(state: &FockState, grid: &PhaseGrid) -> Result<WignerField> {
    let kernel = DisplacementKernel::new(state.cutoff());
    let bands = DensityBands::from_pure(state);
    let mut values = vec![0.0; grid.nx * grid.ny];
    values
        .par_chunks_mut(grid.nx)
        .enumerate()
        .for_each_init(
            || Scratch::new(&kernel),
            |scratch, (j, row)| {
                for (i, v) in row.iter_mut().enumerate() {
                    *v = eval_bands(&bands, &kernel, scratch, grid.point(i, j));
                }
            },
        );
    if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
        let p = grid.point(idx % grid.nx, idx / grid.nx);
        return Err(GcsError::NumericalConsistency {
            re: p.re,
            im: p.im,
            residue: f64::NAN,
        });
    }
    Ok(WignerField { grid: *grid, values })
}

/// Samples `W` of a pure state or mixture on `grid`. Mixtures are the
/// weighted pointwise sum of their members' fields.
pub fn wigner_field<'a>(source: impl Into<Source<'a>>, grid: &PhaseGrid) -> Result<WignerField> {
    match source.into() {
        Source::Pure(s) => pure_field(s, grid),
        Source::Mixture(e) => {
            let fields = e
                .components()
                .iter()
                .map(|(w, s)| Ok((*w, pure_field(s, grid)?)))
                .collect::<Result<Vec<_>>>()?;
            let values = (0..grid.nx * grid.ny)
                .map(|idx| {
                    let mut acc = Neumaier::new();
                    for (w, f) in &fields {
                        acc.add(w * f.values[idx]);
                    }
                    acc.total()
                })
                .collect();
            Ok(WignerField { grid: *grid, values })
        }
    }
}

/// Composite trapezoidal integral over the window.
pub fn integrate_field(field: &WignerField) -> f64 {
    let g = &field.grid;
    let weight = |i: usize, n: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
    let mut acc = Neumaier::new();
    for j in 0..g.ny {
        let wy = weight(j, g.ny);
        for i in 0..g.nx {
            acc.add(wy * weight(i, g.nx) * field.at(i, j));
        }
    }
    acc.total() * g.dx() * g.dy()
}

/// `2/pi`, the largest magnitude a Wigner function can take.
pub const WIGNER_BOUND: f64 = 2.0 / PI;

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use super::*;
    use crate::fock::{make_gcs, GcsParams};

    #[test]
    fn reference_point_values() {
        let vac = FockState::vacuum(4);
        assert!((wigner_point_pure(&vac, Complex64::new(0.0, 0.0)).unwrap() - WIGNER_BOUND).abs() < 1e-15);
        let one = FockState::number(1, 4).unwrap();
        assert!((wigner_point_pure(&one, Complex64::new(0.0, 0.0)).unwrap() + WIGNER_BOUND).abs() < 1e-15);
        let coh = FockState::coherent(Complex64::new(2.0, 0.0), 40).unwrap();
        assert!((wigner_point_pure(&coh, Complex64::new(2.0, 0.0)).unwrap() - WIGNER_BOUND).abs() < 1e-12);
    }

    #[test]
    fn coherent_gaussian_off_peak() {
        let alpha = Complex64::new(1.2, -0.7);
        let coh = FockState::coherent(alpha, 50).unwrap();
        for beta in [Complex64::new(0.3, 0.1), Complex64::new(-1.0, 2.0), Complex64::new(2.5, -1.5)] {
            let expect = WIGNER_BOUND * (-2.0 * (beta - alpha).norm_sqr()).exp();
            assert!((wigner_point_pure(&coh, beta).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_path_matches_point_path() {
        let s = make_gcs(&GcsParams::new(2.0, 2.0, 0.4).unwrap(), 40).unwrap();
        let grid = PhaseGrid::square(4.0, 9).unwrap();
        let field = wigner_field(&s, &grid).unwrap();
        for j in 0..9 {
            for i in 0..9 {
                let p = wigner_point_pure(&s, grid.point(i, j)).unwrap();
                assert!((field.at(i, j) - p).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn cat_has_negative_interference() {
        let s = make_gcs(&GcsParams::new(2.0, 2.0, FRAC_PI_2).unwrap(), 40).unwrap();
        let grid = PhaseGrid::square(5.0, 61).unwrap();
        let field = wigner_field(&s, &grid).unwrap();
        assert!(field.min() < -0.1);
        assert!(field.values.iter().all(|v| v.abs() <= WIGNER_BOUND + 1e-9));
    }

    #[test]
    fn integrate_scaled_field() {
        let field = wigner_field(&FockState::vacuum(0), &PhaseGrid::square(6.0, 201).unwrap()).unwrap();
        assert!((integrate_field(&field) - 1.0).abs() < 1e-6);
        assert_eq!(integrate_field(&field.scaled(0.0)), 0.0);
    }

    #[test]
    fn grid_validation() {
        assert!(PhaseGrid::new(0.0, 10, 10).is_err());
        assert!(PhaseGrid::new(1.0, 1, 10).is_err());
    }

    #[test]
    fn interpolation_hits_nodes() {
        let s = FockState::coherent(Complex64::new(1.0, 0.5), 30).unwrap();
        let field = wigner_field(&s, &PhaseGrid::square(3.0, 31).unwrap()).unwrap();
        let p = field.grid.point(12, 17);
        assert!((field.interpolate(p) - field.at(12, 17)).abs() < 1e-12);
    }
}
