//! Config-driven experiments and their reports.

mod config;
mod report;
mod runner;

pub use config::{ExperimentConfig, ExperimentKind, InitialState, OSCILLATOR_PHI};
pub use report::{emit_report, Assertion, Cell, ExperimentReport, OutputFormat, Table};
pub use runner::{random_polynomial, run_experiment};
