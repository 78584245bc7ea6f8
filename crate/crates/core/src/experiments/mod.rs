//! Seeded experiment sweeps, CSV results and run manifests.

mod config;
mod results;
mod runner;

pub use config::{
    ChannelSpec, DatasetSpec, ExperimentConfig, ExperimentKind, OnlineSpec, PrepSpec, SolverSpec,
    SweepSpec, Transform,
};
pub use results::{
    emit_csv, emit_summary, iterations_to_threshold, read_csv, sha256_file, sidecar_paths,
    summarize, DatasetChecksum, Manifest, ResultRow, SummaryRow, CSV_HEADER, MODEL_DIGITAL,
    MODEL_OTA, SUMMARY_HEADER,
};
pub use runner::{
    load_table, prepare_dataset, run, run_online, run_single, run_sweep_kappa, run_sweep_nr,
    run_sweep_snr, trial_stream, write_outputs, Purpose, RunOptions,
};
