//! Experiment harness for the active-vision swarm simulator.
//!
//! Loads scenario files, runs seeded closed-loop simulations (active or
//! fixed vision, with optional channel ablations), computes estimation and
//! formation metrics, benchmarks the attention planner, and replays logged
//! measurements through the estimator offline. Identical scenario + seed
//! always reproduces byte-identical reports.

mod bench;
mod logs;
mod metrics;
mod replay;
mod scenario;
mod sim;

pub use bench::{gap_benchmark, BenchmarkRow};
pub use logs::{
    read_truth_csv, read_uwb_csv, read_vio_csv, read_vision_csv, EstimateRow, TruthRow, UwbRow,
    VioRow, VisionRow,
};
pub use metrics::{
    formation_angle_errors, formation_angles, rmse_per_axis, AggregateMetrics, AxisStats,
    MetricsReport, PairAxisStats, ScenarioReport, SolverStats,
};
pub use replay::{replay, ReplayOutput, ReplayReport};
pub use scenario::{Ablation, Mode, Scenario, ScenarioOverrides};
pub use sim::{run_scenario, run_single, RunDiagnostics, RunLogs, RunOutput, ScenarioRun};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] swarm_core::ConfigError),
    #[error("scenario parse error: {0}")]
    Toml(String),
    #[error("initialization failed: {0}")]
    Init(#[from] estimator::InitError),
    #[error("planner error: {0}")]
    Gap(#[from] gap_planner::GapError),
    #[error("csv error: {0}")]
    Csv(String),
    #[error("{0}")]
    Invalid(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
