//! Wigner negativity `N = integral (|W| - W) d^2 beta`.
//!
//! The integral is taken on a polar lattice: trapezoidal rings in `r` and an
//! equispaced periodic rule in the angle. On a ring of radius `r` the Wigner
//! function is a trigonometric polynomial in the angle whose coefficients need
//! the displacement kernel once per ring, so a lattice of `R` rings and `M`
//! angles costs `O(R (N^2 + M N))` instead of `O(R M N^2)`. The kernel tables
//! depend only on the lattice and the cutoff and are cached per level, which
//! makes repeated evaluations for many states of one family cheap.
//!
//! Each refinement halves the radial step, doubles the angle count and grows
//! the outer radius by 2, until two successive estimates agree to `rel_tol`.

use std::f64::consts::{FRAC_2_PI, PI};
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use realfft::{ComplexToReal, RealFftPlanner};

use super::laguerre::DisplacementKernel;
use super::{default_half_width, DensityBands, PhaseGrid, Source};
use crate::error::{GcsError, Result};
use crate::fock::FockState;
use crate::sum::sum;

/// Number of refinements attempted after the base level.
pub const MAX_REFINEMENTS: usize = 5;
/// Successive estimates closer than this are converged whatever their size.
pub const ABS_FLOOR: f64 = 1e-9;
/// Poisson tail left out by automatic cutoffs for negativity work. The
/// amplitudes beyond a cutoff interfere with the far Gaussian tail, so a
/// truncated coherent state carries negativity of roughly the square root of
/// the neglected mass; `1e-20` keeps that below `1e-9`.
pub const NEGATIVITY_TAIL_TOL: f64 = 1e-20;
/// Kernel tables larger than this many entries are recomputed rather than cached.
const CACHE_LIMIT: usize = 16 << 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativityEstimate {
    pub value: f64,
    pub previous: f64,
    /// Refinement level at which the estimate converged (0 = base lattice).
    pub level: usize,
    pub radial_step: f64,
    pub radius: f64,
    pub angles: usize,
}

struct Level {
    radii: Vec<f64>,
    angles: usize,
    /// Harmonics-to-samples transform around one ring.
    synth: Arc<dyn ComplexToReal<f64>>,
    /// Kernel values per ring, when small enough to keep.
    kernels: Option<Vec<f64>>,
}

/// Polar lattice family for a fixed cutoff and extent.
pub struct PolarQuadrature {
    kernel: DisplacementKernel,
    base_step: f64,
    base_radius: f64,
    base_angles: usize,
    levels: Vec<OnceLock<Level>>,
}

impl PolarQuadrature {
    /// Lattice whose base level matches the default Cartesian grid for a state
    /// of amplitude `alpha` on `cutoff` levels: same step, radius `L`.
    pub fn new(alpha: f64, cutoff: usize) -> Self {
        let radius = default_half_width(alpha, cutoff);
        let step = 2.0 * radius / (PhaseGrid::DEFAULT_POINTS - 1) as f64;
        let arc = (2.0 * PI * (alpha + 3.0) / step).ceil() as usize;
        let angles = (4 * (cutoff + 2)).max(arc).next_multiple_of(8);
        Self::with_lattice(cutoff, step, radius, angles)
    }

    pub fn with_lattice(cutoff: usize, radial_step: f64, radius: f64, angles: usize) -> Self {
        Self {
            kernel: DisplacementKernel::new(cutoff),
            base_step: radial_step,
            base_radius: radius,
            base_angles: angles.max(8),
            levels: (0..=MAX_REFINEMENTS).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn for_source(source: &Source<'_>) -> Self {
        Self::new(source.displacement_scale(), source.cutoff())
    }

    pub fn cutoff(&self) -> usize {
        self.kernel.cutoff()
    }

    /// `(radial step, radius, angles)` of the base level.
    pub fn base_lattice(&self) -> (f64, f64, usize) {
        (self.base_step, self.base_radius, self.base_angles)
    }

    fn level(&self, j: usize) -> &Level {
        self.levels[j].get_or_init(|| self.build_level(j))
    }

    fn build_level(&self, j: usize) -> Level {
        let scale = (1usize << j) as f64;
        let step = self.base_step / scale;
        let radius = self.base_radius + 2.0 * j as f64;
        let rings = (radius / step).round() as usize;
        let angles = self.base_angles << j;
        let radii: Vec<f64> = (0..=rings).map(|i| i as f64 * step).collect();
        let synth = RealFftPlanner::<f64>::new().plan_fft_inverse(angles);
        let len = self.kernel.len();
        let kernels = ((rings + 1) * len <= CACHE_LIMIT).then(|| {
            let mut table = vec![0.0; (rings + 1) * len];
            table
                .par_chunks_mut(len)
                .zip(radii.par_iter())
                .for_each(|(chunk, r)| self.kernel.fill(4.0 * r * r, chunk));
            table
        });
        Level {
            radii,
            angles,
            synth,
            kernels,
        }
    }

    /// `r W(r, delta)` on every lattice node of level `j`, ring-major.
    fn samples(&self, j: usize, bands: &DensityBands) -> Vec<f64> {
        let level = self.level(j);
        let n = self.cutoff();
        let len = self.kernel.len();
        assert_eq!(bands.cutoff(), n, "density bands and lattice disagree on the cutoff");
        let m = level.angles;
        let mut out = vec![0.0; level.radii.len() * m];
        out.par_chunks_mut(m).enumerate().for_each_init(
            || {
                (
                    vec![0.0; len],
                    vec![Complex64::new(0.0, 0.0); n + 1],
                    level.synth.make_input_vec(),
                    level.synth.make_scratch_vec(),
                )
            },
            |(kbuf, harm, spectrum, scratch), (i, row)| {
                let r = level.radii[i];
                if r == 0.0 {
                    return;
                }
                let kvals: &[f64] = match &level.kernels {
                    Some(t) => &t[i * len..(i + 1) * len],
                    None => {
                        self.kernel.fill(4.0 * r * r, kbuf);
                        kbuf
                    }
                };
                bands.harmonics(kvals, harm);
                // x_l = sum_k X_k e^{2 pi i k l / M} with X_{M-k} = conj(X_k)
                // reproduces C_0 + 2 Re sum_k C_k e^{i k delta_l}.
                spectrum.fill(Complex64::new(0.0, 0.0));
                spectrum[0] = Complex64::new(harm[0].re, 0.0);
                spectrum[1..=n].copy_from_slice(&harm[1..=n]);
                level
                    .synth
                    .process_with_scratch(spectrum, row, scratch)
                    .expect("buffer sizes fixed by the plan");
                let scale = r * FRAC_2_PI;
                for v in row.iter_mut() {
                    *v *= scale;
                }
            },
        );
        out
    }

    /// `integral (|W| - W)` of the piecewise-linear interpolant of `r W` over
    /// the triangulated `(r, delta)` lattice.
    fn integrate_negative_part(&self, j: usize, samples: &[f64]) -> f64 {
        let level = self.level(j);
        let m = level.angles;
        let area = 0.5 * level.radii[1] * 2.0 * PI / m as f64;
        let per_ring: Vec<f64> = (0..level.radii.len() - 1)
            .into_par_iter()
            .map(|i| {
                let lo = &samples[i * m..(i + 1) * m];
                let hi = &samples[(i + 1) * m..(i + 2) * m];
                let mut acc = 0.0;
                for l in 0..m {
                    let l1 = if l + 1 == m { 0 } else { l + 1 };
                    acc += negative_part(lo[l], hi[l], lo[l1]) + negative_part(hi[l], hi[l1], lo[l1]);
                }
                acc
            })
            .collect();
        2.0 * area * sum(per_ring)
    }

    /// Converged negativities of mixtures of `components`: target `t` is
    /// `sum_c mixes[t][c] * components[c]`.
    ///
    /// The estimate after level `j` is the Richardson extrapolation of levels
    /// `j-1` and `j`; refinement stops once two successive extrapolations agree
    /// to `rel_tol`.
    pub fn converge_mixtures(
        &self,
        components: &[&DensityBands],
        mixes: &[Vec<f64>],
        rel_tol: f64,
    ) -> Result<Vec<NegativityEstimate>> {
        check_tol(rel_tol)?;
        if let Some(bad) = mixes.iter().find(|w| w.len() != components.len()) {
            return Err(GcsError::domain(format!(
                "mixture has {} weights for {} components",
                bad.len(),
                components.len()
            )));
        }
        let targets = mixes.len();
        let mut raw: Vec<Vec<f64>> = vec![Vec::new(); targets];
        let mut extrapolated: Vec<Vec<f64>> = vec![Vec::new(); targets];
        let mut done: Vec<Option<NegativityEstimate>> = vec![None; targets];
        for j in 0..=MAX_REFINEMENTS {
            let pending: Vec<usize> = (0..targets).filter(|&t| done[t].is_none()).collect();
            if pending.is_empty() {
                break;
            }
            let sampled: Vec<Vec<f64>> = components.iter().map(|b| self.samples(j, b)).collect();
            let level = self.level(j);
            for &t in &pending {
                let value = if components.len() == 1 && mixes[t][0] == 1.0 {
                    self.integrate_negative_part(j, &sampled[0])
                } else {
                    let mut mixed = vec![0.0; sampled[0].len()];
                    for (w, s) in mixes[t].iter().zip(&sampled) {
                        if *w != 0.0 {
                            for (o, v) in mixed.iter_mut().zip(s) {
                                *o += w * v;
                            }
                        }
                    }
                    self.integrate_negative_part(j, &mixed)
                };
                raw[t].push(value);
                if j == 0 {
                    continue;
                }
                let coarse = raw[t][j - 1];
                let estimate = value + (value - coarse) / 3.0;
                extrapolated[t].push(estimate);
                let ext = &extrapolated[t];
                if ext.len() < 2 {
                    continue;
                }
                let previous = ext[ext.len() - 2];
                let diff = (estimate - previous).abs();
                if diff <= rel_tol * estimate.abs() || diff <= ABS_FLOOR {
                    done[t] = Some(NegativityEstimate {
                        value: estimate.max(0.0),
                        previous,
                        level: j,
                        radial_step: level.radii[1],
                        radius: *level.radii.last().unwrap(),
                        angles: level.angles,
                    });
                }
            }
        }
        if let Some(t) = done.iter().position(Option::is_none) {
            let ext = &extrapolated[t];
            return Err(GcsError::Convergence {
                levels: MAX_REFINEMENTS,
                last: ext[ext.len() - 1],
                previous: ext[ext.len() - 2],
            });
        }
        Ok(done.into_iter().map(Option::unwrap).collect())
    }

    pub fn negativity(&self, bands: &DensityBands, rel_tol: f64) -> Result<NegativityEstimate> {
        Ok(self.converge_mixtures(&[bands], &[vec![1.0]], rel_tol)?[0])
    }
}

/// Mean of `max(-f, 0)` over a triangle for the linear interpolant of the
/// vertex values.
#[inline]
fn negative_part(f1: f64, f2: f64, f3: f64) -> f64 {
    // work with g = -f sorted descending
    let (mut a, mut b, mut c) = (-f1, -f2, -f3);
    if a < b {
        std::mem::swap(&mut a, &mut b);
    }
    if b < c {
        std::mem::swap(&mut b, &mut c);
    }
    if a < b {
        std::mem::swap(&mut a, &mut b);
    }
    if a <= 0.0 {
        0.0
    } else if c >= 0.0 {
        (a + b + c) / 3.0
    } else if b <= 0.0 {
        a * a * a / (3.0 * (a - b) * (a - c))
    } else {
        (a + b + c) / 3.0 - c * c * c / (3.0 * (a - c) * (b - c))
    }
}

fn check_tol(rel_tol: f64) -> Result<()> {
    if !(rel_tol > 0.0 && rel_tol <= 0.1) {
        return Err(GcsError::domain(format!("rel_tol = {rel_tol} must lie in (0, 0.1]")));
    }
    Ok(())
}

/// Converged Wigner negativity of a pure state or mixture.
pub fn negativity<'a>(source: impl Into<Source<'a>>, rel_tol: f64) -> Result<f64> {
    let source = source.into();
    let quad = PolarQuadrature::for_source(&source);
    Ok(quad.negativity(&source.bands(), rel_tol)?.value)
}

/// Negativity of the number state `|n>` through the same pipeline.
pub fn fock_negativity(n: usize, rel_tol: f64) -> Result<f64> {
    negativity(&FockState::number(n, n)?, rel_tol)
}

/// Fock reference index for a mean photon number: nearest integer, ties to even.
pub fn fock_reference(nbar: f64) -> Result<usize> {
    if !(nbar.is_finite() && nbar > 0.0) {
        return Err(GcsError::domain(format!("nbar = {nbar} must be finite and > 0")));
    }
    let n = nbar.round_ties_even();
    if n < 1.0 {
        return Err(GcsError::domain(format!("nbar = {nbar} rounds to the vacuum")));
    }
    Ok(n as usize)
}

/// Negativity relative to the number state nearest to `nbar`.
pub fn normalized_negativity<'a>(source: impl Into<Source<'a>>, nbar: f64, rel_tol: f64) -> Result<f64> {
    let reference = fock_negativity(fock_reference(nbar)?, rel_tol)?;
    Ok(negativity(source, rel_tol)? / reference)
}

/// Negativity of `|1>` in closed form, `4 e^{-1/2} - 2`.
pub fn one_photon_negativity() -> f64 {
    4.0 * (-0.5f64).exp() - 2.0
}
