//! Dataset bookkeeping and end-to-end evaluation.

mod eval;
mod manifest;
mod report;

pub use eval::{
    calibrate_manifest, content_key, evaluate, run_ph_eval, CalibrationMode, DiagramCache, EvalConfig,
};
pub use manifest::{
    build_manifest, manifest_to_string, read_manifest, split_manifest, variant_id, variant_seed, write_manifest,
    CorruptOptions, ManifestRecord, Split,
};
pub use report::{
    calibrations_from_csv, calibrations_to_csv, emit_plot_data, fmt_metric, read_calibrations, read_report,
    report_from_csv, report_to_csv, write_calibrations, write_report, EvalRow, CALIBRATION_HEADER, PLOT_HEADER,
    REPORT_HEADER,
};
