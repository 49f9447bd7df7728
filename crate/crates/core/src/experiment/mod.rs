//! Configurations, presets and the sweep runner behind the command line tool.

pub mod config;
pub mod preset;
pub mod runner;

pub use config::{ExperimentConfig, SweepAxis, SweepMember};
pub use preset::{preset, PRESET_NAMES};
pub use runner::{check, csv_string, execute, run, MemberOutput, RunReport, RunStatus, RunSummary};
