//! Experiment orchestration: configuration, seeded trials, parameter
//! sweeps, CSV output and the property validation suite.

mod config;
mod csvio;
mod montecarlo;
mod sweep;
mod trial;
mod validate;

pub use config::{ExperimentConfig, InitStrategy};
pub use csvio::{emit_csv, read_csv, write_csv, write_gnuplot, CSV_HEADER};
pub use montecarlo::{empirical_mse, MonteCarloEstimate};
pub use sweep::{derive_seed, sweep_k, sweep_snr, SweepResult, SweepRow};
pub use trial::{run_trial, Scheme, SchemeKey, SchemeOutcome, TrialRecord};
pub use validate::{small_instance, validate, PropertyOutcome, ValidateOptions, ValidationReport};
