//! Config-driven experiment harness: Monte Carlo sweeps, CSV records and
//! summaries.

pub mod config;
pub mod experiment;
pub mod props;
pub mod record;
pub mod summary;

pub use config::{Algorithm, ExperimentConfig, PropsConfig, RawConfig};
pub use experiment::{run_experiment, run_experiment_with_frame, run_trial, trial_seed};
pub use props::{run_props, write_props};
pub use record::{read_records, write_records, TrialRecord, CSV_HEADER};
pub use summary::{emit_plotdata, summarize_file, summarize_records, write_summary, SummaryRow};
