//! Sweeps over `(epsilon, tau, p)`.
//!
//! Scan points are independent and evaluated with rayon in the caller's
//! thread pool. Results are collected in grid order and every reduction inside
//! a point runs in a fixed order, so the output does not depend on the pool
//! width.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::{rescale_factor, Quantity, ScanSpec, TauGrid, WernerBlock};
use super::output::{create, write_frame, Metadata, Row, ScanResult, TOOL, VERSION};
use super::Format;
use crate::ensembles::{atomic_purity, werner_weights};
use crate::error::{GcsError, Result};
use crate::fock::{auto_cutoff, make_gcs, FockState, GcsParams, DEFAULT_TAIL_TOL};
use crate::metrology::normalized_qfi;
use crate::wigner::negativity::{fock_negativity, fock_reference, PolarQuadrature, MAX_REFINEMENTS, NEGATIVITY_TAIL_TOL};
use crate::wigner::{wigner_field, DensityBands, PhaseGrid};

/// Outcome of one quantity at one scan point; failures carry their message.
type Cell = std::result::Result<f64, String>;

/// Shared per-scan state: cutoff, quadrature lattice and Fock reference.
pub struct Engine {
    alpha: f64,
    nbar: f64,
    cutoff: usize,
    rel_tol: f64,
    quad: PolarQuadrature,
    /// `(n, N(|n>))` when negativities are requested.
    fock: Option<(usize, f64)>,
}

impl Engine {
    pub fn new(spec: &ScanSpec, with_negativity: bool) -> Result<Self> {
        spec.validate()?;
        let nbar = spec.nbar();
        let alpha = nbar.sqrt();
        let cutoff = match spec.cutoff {
            Some(c) => c,
            None => auto_cutoff(nbar, tail_tol(with_negativity))?,
        };
        let fock = if with_negativity {
            let n = fock_reference(nbar)?;
            Some((n, fock_negativity(n, spec.rel_tol)?))
        } else {
            None
        };
        Ok(Self {
            alpha,
            nbar,
            cutoff,
            rel_tol: spec.rel_tol,
            quad: PolarQuadrature::new(alpha, cutoff),
            fock,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn quadrature(&self) -> &PolarQuadrature {
        &self.quad
    }

    fn fock_value(&self) -> f64 {
        self.fock.expect("engine built without negativity").1
    }

    fn bands(&self, epsilon: f64, tau: f64) -> Result<DensityBands> {
        Ok(DensityBands::from_pure(&self.state(epsilon, tau)?))
    }

    pub fn state(&self, epsilon: f64, tau: f64) -> Result<FockState> {
        make_gcs(&GcsParams::new(self.alpha, epsilon, tau)?, self.cutoff)
    }

    /// `(n, N(|n>))` of the Fock reference, when negativities were requested.
    pub fn fock_reference(&self) -> Option<(usize, f64)> {
        self.fock
    }

    pub fn raw_negativity(&self, epsilon: f64, tau: f64) -> Result<f64> {
        let bands = self.bands(epsilon, tau)?;
        Ok(self.quad.negativity(&bands, self.rel_tol)?.value)
    }

    /// Negativity of the state at `(epsilon, tau)` relative to the Fock reference.
    pub fn negativity(&self, epsilon: f64, tau: f64) -> Result<f64> {
        Ok(self.raw_negativity(epsilon, tau)? / self.fock_value())
    }

    pub fn qfi(&self, epsilon: f64, tau: f64) -> Result<f64> {
        normalized_qfi(&self.state(epsilon, tau)?, self.nbar)
    }

    fn cell(&self, quantity: &str, epsilon: f64, tau: f64) -> Cell {
        let value = match quantity {
            NEGATIVITY => self.negativity(epsilon, tau),
            _ => self.qfi(epsilon, tau),
        };
        value.map_err(|e| e.to_string())
    }

    /// Normalized negativities of the Werner field mixture for every `p`.
    pub fn werner_negativities(&self, epsilon: f64, tau: f64, block: &WernerBlock, ps: &[f64]) -> Result<Vec<f64>> {
        let bands = block
            .lambdas
            .iter()
            .map(|l| self.bands(epsilon, l * tau))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&DensityBands> = bands.iter().collect();
        let mixes = ps
            .iter()
            .map(|&p| werner_weights(&block.spec(p, tau)?))
            .collect::<Result<Vec<_>>>()?;
        let fock = self.fock_value();
        Ok(self
            .quad
            .converge_mixtures(&refs, &mixes, self.rel_tol)?
            .into_iter()
            .map(|e| e.value / fock)
            .collect())
    }

    /// Run description embedded in every output.
    pub fn metadata(&self, spec: &ScanSpec, operation: &str) -> Metadata {
        let mut m = Metadata::new();
        m.insert("tool".into(), TOOL.into());
        m.insert("version".into(), VERSION.into());
        m.insert("operation".into(), operation.into());
        m.insert("alpha_sq".into(), spec.alpha_sq.into());
        m.insert("cutoff".into(), self.cutoff.into());
        m.insert(
            "cutoff_policy".into(),
            if spec.cutoff.is_some() {
                "fixed".into()
            } else {
                format!("poisson tail < {:e}", tail_tol(self.fock.is_some())).into()
            },
        );
        m.insert("rel_tol".into(), spec.rel_tol.into());
        m.insert("rescale".into(), spec.rescale.into());
        m.insert("tau_policy".into(), json!(spec.tau_policy));
        if let Some((n, value)) = self.fock {
            m.insert("fock_reference".into(), json!({ "n": n, "negativity": value }));
            let (step, radius, angles) = self.quad.base_lattice();
            m.insert(
                "negativity_lattice".into(),
                json!({
                    "radial_step": step,
                    "radius": radius,
                    "angles": angles,
                    "max_refinements": MAX_REFINEMENTS,
                    "rule": "polar triangles with Richardson extrapolation",
                }),
            );
        }
        m.insert("qfi_normalization".into(), "4 (4 nbar + 1)".into());
        m
    }
}

fn tail_tol(with_negativity: bool) -> f64 {
    if with_negativity {
        NEGATIVITY_TAIL_TOL
    } else {
        DEFAULT_TAIL_TOL
    }
}

const NEGATIVITY: &str = "negativity";
const QFI: &str = "qfi";

fn quantities(q: Quantity) -> Vec<&'static str> {
    let mut out = Vec::new();
    if q.negativity() {
        out.push(NEGATIVITY);
    }
    if q.qfi() {
        out.push(QFI);
    }
    out
}

fn rescaled(spec: &ScanSpec, epsilon: f64, tau: f64) -> Option<f64> {
    spec.rescale.then(|| tau * rescale_factor(epsilon))
}

fn grid_json(g: &TauGrid) -> Value {
    json!({ "start": g.start, "stop": g.stop, "count": g.count })
}

fn cell_row(quantity: &str, cell: &Cell) -> Row {
    match cell {
        Ok(v) => Row::value(quantity, *v),
        Err(msg) => Row {
            value: None,
            error: Some(msg.clone()),
            ..Row::value(quantity, 0.0)
        },
    }
}

/// Every requested quantity at every `(epsilon, tau)` of the scan grids.
pub fn scan_evolution(spec: &ScanSpec) -> Result<ScanResult> {
    let engine = Engine::new(spec, spec.quantity.negativity())?;
    let qs = quantities(spec.quantity);
    let mut meta = engine.metadata(spec, "scan_evolution");
    let mut grids = Vec::new();
    let mut tasks = Vec::new();
    for &eps in &spec.epsilons {
        let grid = spec.tau_grid_for(eps)?;
        grids.push(json!({ "epsilon": eps, "tau_grid": grid_json(&grid) }));
        tasks.extend(grid.points().into_iter().map(|tau| (eps, tau)));
    }
    meta.insert("tau_grids".into(), grids.into());
    let cells: Vec<Vec<Cell>> = tasks
        .par_iter()
        .map(|&(eps, tau)| qs.iter().map(|q| engine.cell(q, eps, tau)).collect())
        .collect();
    let rows = tasks
        .iter()
        .zip(&cells)
        .flat_map(|(&(eps, tau), cs)| {
            qs.iter()
                .zip(cs)
                .map(move |(q, c)| cell_row(q, c).with_epsilon(eps).with_tau(tau, rescaled(spec, eps, tau)))
        })
        .collect();
    Ok(ScanResult::new(meta, rows))
}

/// Indices of the `k` largest local maxima of a sampled curve, best first.
/// Failed samples never qualify and do not block their neighbours.
fn top_peaks(values: &[Option<f64>], k: usize) -> Vec<usize> {
    let n = values.len();
    let mut peaks: Vec<usize> = (0..n)
        .filter(|&i| {
            let Some(v) = values[i] else { return false };
            let left = i.checked_sub(1).and_then(|j| values[j]).map_or(true, |l| v >= l);
            let right = values.get(i + 1).copied().flatten().map_or(true, |r| v >= r);
            left && right
        })
        .collect();
    peaks.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap().then(a.cmp(&b)));
    peaks.truncate(k);
    peaks
}

/// Refinement window of `count` points spanning one coarse step on each side
/// of coarse point `i`, clipped to the coarse range.
fn refine_window(grid: &TauGrid, i: usize, count: usize) -> Result<TauGrid> {
    let points = grid.points();
    let lo = if i == 0 { points[0] } else { points[i - 1] };
    let hi = if i + 1 == points.len() { points[i] } else { points[i + 1] };
    TauGrid::new(lo, hi, count)
}

/// Largest successful sample, first one on ties.
fn best_of(samples: impl IntoIterator<Item = (f64, Cell)>) -> std::result::Result<(f64, f64), String> {
    let mut best: Option<(f64, f64)> = None;
    let mut first_err = None;
    for (tau, cell) in samples {
        match cell {
            Ok(v) if best.map_or(true, |(_, b)| v > b) => best = Some((tau, v)),
            Ok(_) => {}
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.unwrap_or_else(|| "no samples".into()))
}

/// For each `epsilon` the maximum of each quantity over `tau`: a coarse grid
/// followed by refinement windows around the best coarse peaks.
pub fn scan_max_over_tau(spec: &ScanSpec) -> Result<ScanResult> {
    let engine = Engine::new(spec, spec.quantity.negativity())?;
    let qs = quantities(spec.quantity);
    let mut meta = engine.metadata(spec, "scan_max_over_tau");
    meta.insert(
        "refinement".into(),
        json!({ "peaks": spec.refine_peaks, "points": spec.refine_count }),
    );
    let mut grids = Vec::new();
    let mut rows = Vec::new();
    for &eps in &spec.epsilons {
        let grid = spec.tau_grid_for(eps)?;
        let taus = grid.points();
        let coarse: Vec<Vec<Cell>> = taus
            .par_iter()
            .map(|&tau| qs.iter().map(|q| engine.cell(q, eps, tau)).collect())
            .collect();
        let mut windows_json = serde_json::Map::new();
        for (qi, q) in qs.iter().enumerate() {
            let series: Vec<Option<f64>> = coarse.iter().map(|c| c[qi].clone().ok()).collect();
            let windows = top_peaks(&series, spec.refine_peaks)
                .into_iter()
                .map(|i| refine_window(&grid, i, spec.refine_count))
                .collect::<Result<Vec<_>>>()?;
            let fine_taus: Vec<f64> = windows.iter().flat_map(TauGrid::points).collect();
            let fine: Vec<Cell> = fine_taus.par_iter().map(|&tau| engine.cell(q, eps, tau)).collect();
            windows_json.insert(q.to_string(), windows.iter().map(grid_json).collect());
            let samples = taus
                .iter()
                .zip(&coarse)
                .map(|(&t, c)| (t, c[qi].clone()))
                .chain(fine_taus.into_iter().zip(fine));
            let tag = format!("max_{q}");
            rows.push(match best_of(samples) {
                Ok((tau, v)) => Row::value(&tag, v).with_epsilon(eps).with_tau(tau, rescaled(spec, eps, tau)),
                Err(msg) => cell_row(&tag, &Err(msg)).with_epsilon(eps),
            });
        }
        grids.push(json!({ "epsilon": eps, "tau_grid": grid_json(&grid), "refinement_windows": windows_json }));
    }
    meta.insert("tau_grids".into(), grids.into());
    Ok(ScanResult::new(meta, rows))
}

/// Maximum normalized negativity over `tau` of the Werner field mixture, for
/// every `p` and `epsilon`, plus one atomic purity row per `p`.
pub fn scan_werner(spec: &ScanSpec) -> Result<ScanResult> {
    let block = spec
        .werner
        .clone()
        .ok_or_else(|| GcsError::config("werner", "Werner scan needs a [werner] block"))?;
    let engine = Engine::new(spec, true)?;
    let ps = spec.p_values();
    let mut meta = engine.metadata(spec, "scan_werner");
    meta.insert("werner".into(), json!(block));
    meta.insert("p_grid".into(), json!(ps));
    meta.insert(
        "refinement".into(),
        json!({ "peaks": spec.refine_peaks, "points": spec.refine_count }),
    );

    let eval = |eps: f64, tau: f64| -> std::result::Result<Vec<f64>, String> {
        engine.werner_negativities(eps, tau, &block, &ps).map_err(|e| e.to_string())
    };
    // best[p][eps]
    let mut best: Vec<Vec<Row>> = vec![Vec::new(); ps.len()];
    let mut grids = Vec::new();
    for &eps in &spec.epsilons {
        let grid = spec.tau_grid_for(eps)?;
        let taus = grid.points();
        let coarse: Vec<_> = taus.par_iter().map(|&tau| eval(eps, tau)).collect();
        let peaks: Vec<Vec<usize>> = (0..ps.len())
            .map(|pi| {
                let series: Vec<Option<f64>> = coarse.iter().map(|c| c.as_ref().ok().map(|v| v[pi])).collect();
                top_peaks(&series, spec.refine_peaks)
            })
            .collect();
        // windows shared between p values are evaluated once
        let centres: Vec<usize> = {
            let mut c: Vec<usize> = peaks.iter().flatten().copied().collect();
            c.sort_unstable();
            c.dedup();
            c
        };
        let windows = centres
            .iter()
            .map(|&i| refine_window(&grid, i, spec.refine_count))
            .collect::<Result<Vec<_>>>()?;
        let fine_tasks: Vec<(usize, f64)> = windows
            .iter()
            .enumerate()
            .flat_map(|(w, g)| g.points().into_iter().map(move |t| (w, t)))
            .collect();
        let fine: Vec<_> = fine_tasks.par_iter().map(|&(_, tau)| eval(eps, tau)).collect();
        let mut fine_by_centre: BTreeMap<usize, Vec<(f64, &std::result::Result<Vec<f64>, String>)>> = BTreeMap::new();
        for ((w, tau), v) in fine_tasks.iter().zip(&fine) {
            fine_by_centre.entry(centres[*w]).or_default().push((*tau, v));
        }
        for (pi, &p) in ps.iter().enumerate() {
            let pick = |r: &std::result::Result<Vec<f64>, String>| r.as_ref().map(|v| v[pi]).map_err(Clone::clone);
            let samples = taus.iter().zip(&coarse).map(|(&t, c)| (t, pick(c))).chain(
                peaks[pi]
                    .iter()
                    .flat_map(|c| fine_by_centre[c].iter().map(|(t, v)| (*t, pick(v)))),
            );
            best[pi].push(match best_of(samples) {
                Ok((tau, v)) => Row::value("max_negativity", v)
                    .with_p(p)
                    .with_epsilon(eps)
                    .with_tau(tau, rescaled(spec, eps, tau)),
                Err(msg) => cell_row("max_negativity", &Err(msg)).with_p(p).with_epsilon(eps),
            });
        }
        grids.push(json!({
            "epsilon": eps,
            "tau_grid": grid_json(&grid),
            "refinement_windows": windows.iter().map(grid_json).collect::<Vec<_>>(),
        }));
    }
    meta.insert("tau_grids".into(), grids.into());
    let mut rows = Vec::new();
    for (pi, &p) in ps.iter().enumerate() {
        rows.push(Row::value("purity", atomic_purity(&block.spec(p, 0.0)?)?).with_p(p));
        rows.append(&mut best[pi]);
    }
    Ok(ScanResult::new(meta, rows))
}

/// File name of frame `index` for exponent `epsilon`.
pub fn frame_name(epsilon: f64, index: usize, format: Format) -> String {
    format!("wigner_eps{epsilon}_{index:02}.{}", format.extension())
}

/// Samples the Wigner function of `GCS(sqrt(alpha_sq), epsilon, tau)` for each
/// `tau` and writes one file per frame into `dir`. All files are created
/// before any field is computed, so an unwritable destination fails fast.
pub fn export_wigner_frames(
    alpha_sq: f64,
    epsilon: f64,
    taus: &[f64],
    grid: Option<PhaseGrid>,
    cutoff: Option<usize>,
    dir: &Path,
    format: Format,
) -> Result<Vec<PathBuf>> {
    if !(alpha_sq.is_finite() && alpha_sq >= 0.0) {
        return Err(GcsError::domain(format!("alpha_sq = {alpha_sq} must be finite and >= 0")));
    }
    let alpha = alpha_sq.sqrt();
    // tight tail so that linear evolutions show no spurious negative values
    let cutoff = match cutoff {
        Some(c) => c,
        None => auto_cutoff(alpha_sq, NEGATIVITY_TAIL_TOL)?,
    };
    let grid = grid.unwrap_or_else(|| PhaseGrid::for_state(alpha, cutoff));
    PhaseGrid::new(grid.half_width, grid.nx, grid.ny)?;
    let params = taus
        .iter()
        .map(|&tau| GcsParams::new(alpha, epsilon, tau))
        .collect::<Result<Vec<_>>>()?;

    let paths: Vec<PathBuf> = (0..taus.len()).map(|i| dir.join(frame_name(epsilon, i, format))).collect();
    let files = paths.iter().map(|p| create(p)).collect::<Result<Vec<_>>>()?;

    for ((params, path), file) in params.iter().zip(&paths).zip(files) {
        let state = make_gcs(params, cutoff)?;
        let field = wigner_field(&state, &grid)?;
        let mut meta = Metadata::new();
        meta.insert("tool".into(), TOOL.into());
        meta.insert("version".into(), VERSION.into());
        meta.insert("alpha_sq".into(), alpha_sq.into());
        meta.insert("epsilon".into(), epsilon.into());
        meta.insert("tau".into(), params.tau.into());
        meta.insert("cutoff".into(), cutoff.into());
        meta.insert("truncation_deficit".into(), state.truncation_deficit().into());
        let mut out = std::io::BufWriter::new(file);
        write_frame(&mut out, &field, &meta, format)
            .and_then(|_| std::io::Write::flush(&mut out))
            .map_err(|e| GcsError::io(path, e))?;
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peaks_are_ranked() {
        let v = [Some(1.0), Some(0.5), Some(2.0), None, Some(3.0), Some(2.5), Some(2.9)];
        assert_eq!(top_peaks(&v, 2), vec![4, 6]);
        assert_eq!(top_peaks(&v, 10), vec![4, 6, 2, 0]);
        assert!(top_peaks(&[None, None], 3).is_empty());
    }

    #[test]
    fn windows_stay_inside_the_grid() {
        let g = TauGrid::new(1.0, 2.0, 11).unwrap();
        let w = refine_window(&g, 0, 5).unwrap();
        assert_eq!((w.start, w.stop), (1.0, 1.1));
        let w = refine_window(&g, 10, 5).unwrap();
        assert_eq!((w.start, w.stop), (g.points()[9], 2.0));
    }

    #[test]
    fn best_sample_prefers_first_on_ties() {
        let s = vec![(0.1, Ok(1.0)), (0.2, Err("x".to_owned())), (0.3, Ok(1.0))];
        assert_eq!(best_of(s).unwrap(), (0.1, 1.0));
        assert_eq!(best_of(vec![(0.1, Err("bad".to_owned()))]).unwrap_err(), "bad");
    }

    #[test]
    fn linear_evolutions_in_a_small_scan() {
        let mut spec = ScanSpec::new(4.0, vec![0.0, 1.0]);
        spec.tau_grid = Some(TauGrid::new(0.2, 3.0, 4).unwrap());
        let r = scan_evolution(&spec).unwrap();
        assert_eq!(r.rows.len(), 2 * 4 * 2);
        for row in r.select("negativity") {
            assert!(row.value.unwrap() < 1e-8);
        }
        for row in r.select("qfi") {
            assert!((row.value.unwrap() - 1.0 / 17.0).abs() < 1e-9);
        }
    }
}
