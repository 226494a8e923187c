//! Experiment orchestration: trials, sweeps, closed-form tables, the oracle
//! suite and CSV output.

pub mod analytics;
pub mod csv;
pub mod oracles;
pub mod stats;
pub mod sweep;
pub mod trial;
pub mod verify;

pub use analytics::{emit_analytics, parse_analytic_file, AnalyticGrid};
pub use csv::{Cell, Table};
pub use sweep::{run_point, run_sweep, Metric, PointStats, SweepAxis, SweepSpec};
pub use trial::{
    map_trials, raw_table, run_trial, run_trial_with, PlugInMode, SimulateSpec, TrialRecord,
    UserRecord,
};
pub use verify::{parse_verify_file, verify_oracles, Check, Report, VerifyOptions};
