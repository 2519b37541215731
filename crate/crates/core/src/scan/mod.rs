//! Parameter sweeps, figure regeneration and their file formats.

mod config;
pub mod figures;
mod output;
mod run;

pub use config::{
    defaults, kerr_time, parse_config, parse_config_str, rescale_factor, tau_window, Format, OutputSpec, Quantity,
    ScanSpec, TauGrid, TauPolicy, WernerBlock,
};
pub use figures::write_figure;
pub use output::{format_number, read_csv_rows, write_frame, Metadata, Row, ScanResult, TOOL, VERSION};
pub use run::{export_wigner_frames, frame_name, scan_evolution, scan_max_over_tau, scan_werner, Engine};
