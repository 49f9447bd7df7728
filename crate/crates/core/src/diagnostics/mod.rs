//! Post-processing of sampled trajectories: the Lyapunov energy, per-sample
//! error metrics, log-log rate fits and oscillation measures.

mod energy;
mod metrics;
mod oscillation;
mod rate;

pub use energy::{energy, energy_coefficients, EnergyReport};
pub use metrics::{metrics, Metric, MetricRow, CSV_HEADER};
pub use oscillation::{oscillation_measure, series_oscillation, ComponentSelector, Oscillation};
pub use rate::{fit_rate, RateEstimate, Verdict, DEFAULT_SLACK, VALUE_FLOOR};
