//! Generalized coherent states of a single field mode under photon-number
//! nonlinear evolution `exp(-i tau n^epsilon)`: construction on a truncated
//! Fock basis, photon statistics, Wigner functions and their negativity,
//! displacement-sensing Fisher information, Werner-mixed media, and the
//! parameter scans built on top of them.

pub mod ensembles;
pub mod error;
pub mod fock;
pub mod metrology;
pub mod scan;
pub mod sum;
pub mod wigner;

pub use ensembles::{atomic_purity, evolve_werner, werner_weights, Ensemble, WernerSpec};
pub use error::{GcsError, Result};
pub use fock::{auto_cutoff, make_gcs, make_gcs_auto, yurke_stoler_cat, FockState, GcsParams};
pub use metrology::{cramer_rao, normalized_qfi, qfi_direction, qfi_max, squeezing_equivalent_db, QfiReport};
pub use wigner::{
    fock_negativity, integrate_field, negativity, normalized_negativity, wigner_field, wigner_point_closed,
    wigner_point_pure, PhaseGrid, WignerField,
};

pub use num_complex::Complex64;
