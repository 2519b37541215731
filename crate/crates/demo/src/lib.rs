//! Browser bindings: Wigner frames, photon statistics and Fisher information,
//! and negativity curves of generalized coherent states.

use gcs_core::metrology::qfi_max;
use gcs_core::scan::{tau_window, Engine, Quantity, ScanSpec, TauPolicy};
use gcs_core::wigner::{wigner_field, PhaseGrid, NEGATIVITY_TAIL_TOL};
use gcs_core::{auto_cutoff, make_gcs, GcsParams};
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// Sampled Wigner function on `[-L, L]^2`.
#[wasm_bindgen]
pub struct Frame {
    half_width: f64,
    n: usize,
    values: Vec<f64>,
    min: f64,
    max: f64,
}

#[wasm_bindgen]
impl Frame {
    #[wasm_bindgen(getter)]
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    #[wasm_bindgen(getter)]
    pub fn n(&self) -> usize {
        self.n
    }

    #[wasm_bindgen(getter)]
    pub fn min(&self) -> f64 {
        self.min
    }

    #[wasm_bindgen(getter)]
    pub fn max(&self) -> f64 {
        self.max
    }

    /// Row-major values, `values[j * n + i] = W(x_i + i y_j)`.
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }
}

#[wasm_bindgen]
pub fn wigner_frame(alpha_sq: f64, epsilon: f64, tau: f64, n: usize) -> Result<Frame, JsError> {
    let cutoff = auto_cutoff(alpha_sq, NEGATIVITY_TAIL_TOL).map_err(js_err)?;
    let state = make_gcs(&GcsParams::from_nbar(alpha_sq, epsilon, tau).map_err(js_err)?, cutoff).map_err(js_err)?;
    let grid = PhaseGrid::square(PhaseGrid::for_state(alpha_sq.sqrt(), cutoff).half_width, n).map_err(js_err)?;
    let field = wigner_field(&state, &grid).map_err(js_err)?;
    Ok(Frame {
        half_width: grid.half_width,
        n,
        min: field.min(),
        max: field.max(),
        values: field.values,
    })
}

/// Photon statistics and displacement sensitivity at one point.
#[wasm_bindgen]
pub struct Stats {
    pub mean_n: f64,
    pub mandel_q: f64,
    pub qfi: f64,
    pub normalized_qfi: f64,
    pub best_angle: f64,
}

#[wasm_bindgen]
pub fn statistics(alpha_sq: f64, epsilon: f64, tau: f64) -> Result<Stats, JsError> {
    let params = GcsParams::from_nbar(alpha_sq, epsilon, tau).map_err(js_err)?;
    let cutoff = auto_cutoff(alpha_sq, 1e-12).map_err(js_err)?;
    let state = make_gcs(&params, cutoff).map_err(js_err)?;
    let report = qfi_max(&state);
    Ok(Stats {
        mean_n: state.mean_photon_number(),
        mandel_q: state.mandel_q().map_err(js_err)?,
        qfi: report.qfi,
        normalized_qfi: report.qfi / (4.0 * (4.0 * alpha_sq + 1.0)),
        best_angle: report.best_angle,
    })
}

/// Default `tau` window for `epsilon`, widened to the effective Kerr time.
#[wasm_bindgen]
pub fn tau_range(alpha_sq: f64, epsilon: f64) -> f64 {
    tau_window(epsilon, alpha_sq, TauPolicy::Kerr)
}

/// Negativity relative to the nearest Fock state at `count` equispaced
/// `tau` in `(0, tau_max]`.
#[wasm_bindgen]
pub fn negativity_curve(alpha_sq: f64, epsilon: f64, tau_max: f64, count: usize) -> Result<Vec<f64>, JsError> {
    let mut spec = ScanSpec::new(alpha_sq, vec![epsilon]);
    spec.quantity = Quantity::Negativity;
    spec.rel_tol = 1e-2;
    let engine = Engine::new(&spec, true).map_err(js_err)?;
    (1..=count)
        .map(|i| engine.negativity(epsilon, tau_max * i as f64 / count as f64).map_err(js_err))
        .collect()
}
