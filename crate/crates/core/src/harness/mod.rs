//! Sweep orchestration: device profiles, the anneal-time sweep and
//! persistence of its results.

mod export;
mod profile;
mod sweep;

pub use export::{
    export, import, read_curves_csv, read_record_json, write_curves_csv, write_record_json,
    CurveRow, ExportFormat, CURVES_FILE, RECORD_FILE,
};
pub use profile::{ingest_profile, parse_profile, DeviceProfile, QubitRecord};
pub use sweep::{
    default_grid, derive_seed, log_grid, rerun, run_cell, run_sweep, window_rule, CellRecord,
    ExperimentRecord, Mode, SweepConfig, DENSE_INTERVALS,
};
