//! Experiment orchestration: configuration, the trial engine, parallel sweeps
//! and output files.

pub mod config;
pub mod output;
pub mod sweep;
pub mod trial;

pub use config::{parse_distance_grid, parse_float_list, parse_protocols, BackendKind, ExperimentConfig, Preset};
pub use output::{emit_outputs, results_csv, MANIFEST_FILE, RESULTS_HEADER};
pub use sweep::{protocol_variants, run_experiment, simulate, ResultRow, SweepResult};
pub use trial::{simulate_trial, ProtocolVariant, Realization, TrialParams};
