//! Data behind the four figures of the generalized-coherent-state study.
//!
//! | figure | content |
//! |--------|---------|
//! | 1 | Wigner frames at `nbar = 50` for `epsilon = 0.5, 2` at `tau = 0, t_K/2, t_K` |
//! | 2 | normalized negativity versus `tau` (a) and its maximum over `tau` (b) |
//! | 3 | normalized Fisher information versus `tau` (a) and its maximum (b) |
//! | 4 | maximum normalized negativity of the Werner-medium field versus `p` |
//!
//! `t_K` is the effective Kerr time of [`kerr_time`]. Curves versus `tau`
//! use the periodic window; maxima use the Kerr window, which for `epsilon <
//! 1` reaches the time of largest negativity outside the plotted range.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::config::{kerr_time, Format, Quantity, ScanSpec, TauPolicy, WernerBlock};
use super::output::{create, ScanResult};
use super::run::{export_wigner_frames, frame_name, scan_evolution, scan_max_over_tau, scan_werner};
use crate::error::{GcsError, Result};

pub const FIG_NBAR: f64 = 10.0;
pub const FRAME_NBAR: f64 = 50.0;
pub const FRAME_EPSILONS: [f64; 2] = [0.5, 2.0];
pub const CURVE_EPSILONS: [f64; 4] = [0.5, 1.5, 2.0, 3.0];
pub const MAX_EPSILONS: [f64; 6] = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0];

/// Frame times for exponent `epsilon`: start, half and full effective Kerr time.
pub fn frame_taus(epsilon: f64) -> [f64; 3] {
    let t = kerr_time(epsilon, FRAME_NBAR);
    [0.0, 0.5 * t, t]
}

pub fn curve_spec(quantity: Quantity, rel_tol: f64) -> ScanSpec {
    let mut spec = ScanSpec::new(FIG_NBAR, CURVE_EPSILONS.to_vec());
    spec.quantity = quantity;
    spec.rel_tol = rel_tol;
    spec
}

pub fn max_spec(quantity: Quantity, rel_tol: f64) -> ScanSpec {
    let mut spec = ScanSpec::new(FIG_NBAR, MAX_EPSILONS.to_vec());
    spec.quantity = quantity;
    spec.rel_tol = rel_tol;
    spec.tau_policy = TauPolicy::Kerr;
    spec
}

pub fn werner_spec(rel_tol: f64) -> ScanSpec {
    let mut spec = curve_spec(Quantity::Negativity, rel_tol);
    spec.tau_policy = TauPolicy::Kerr;
    spec.werner = Some(WernerBlock::default());
    spec
}

/// Output file names of figure `which`.
pub fn figure_files(which: u8, format: Format) -> Result<Vec<String>> {
    let ext = format.extension();
    Ok(match which {
        1 => FRAME_EPSILONS
            .iter()
            .flat_map(|&e| (0..3).map(move |i| frame_name(e, i, format)))
            .collect(),
        2 => vec![format!("fig2a.{ext}"), format!("fig2b.{ext}")],
        3 => vec![format!("fig3a.{ext}"), format!("fig3b.{ext}")],
        4 => vec![format!("fig4.{ext}")],
        _ => return Err(GcsError::config("which", format!("figure {which} does not exist (1-4)"))),
    })
}

fn save_all(results: &[ScanResult], files: Vec<File>, paths: &[PathBuf], format: Format) -> Result<()> {
    for ((result, file), path) in results.iter().zip(files).zip(paths) {
        let mut out = BufWriter::new(file);
        result
            .write(&mut out, format)
            .and_then(|_| out.flush())
            .map_err(|e| GcsError::io(path, e))?;
    }
    Ok(())
}

/// Regenerates the data of figure `which` into `dir`; returns the written
/// paths. Output files are opened before any computation.
pub fn write_figure(which: u8, dir: &Path, format: Format, rel_tol: f64) -> Result<Vec<PathBuf>> {
    let paths: Vec<PathBuf> = figure_files(which, format)?.into_iter().map(|f| dir.join(f)).collect();
    if which == 1 {
        let mut written = Vec::new();
        for eps in FRAME_EPSILONS {
            written.extend(export_wigner_frames(FRAME_NBAR, eps, &frame_taus(eps), None, None, dir, format)?);
        }
        return Ok(written);
    }
    let files = paths.iter().map(|p| create(p)).collect::<Result<Vec<_>>>()?;
    let results = match which {
        2 => vec![
            scan_evolution(&curve_spec(Quantity::Negativity, rel_tol))?,
            scan_max_over_tau(&max_spec(Quantity::Negativity, rel_tol))?,
        ],
        3 => vec![
            scan_evolution(&curve_spec(Quantity::Qfi, rel_tol))?,
            scan_max_over_tau(&max_spec(Quantity::Qfi, rel_tol))?,
        ],
        _ => vec![scan_werner(&werner_spec(rel_tol))?],
    };
    save_all(&results, files, &paths, format)?;
    Ok(paths)
}
