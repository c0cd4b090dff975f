//! Request/response types of the swarm simulation service.
//!
//! Scenarios travel as raw TOML text so the server owns the single parser
//! and validator; structured overrides ride alongside. All types serialize
//! with serde and are shared by the server and the client.

use serde::{Deserialize, Serialize};
use uuid::Uuid;

pub use harness::{
    Ablation, BenchmarkRow, Mode, ReplayReport, RunDiagnostics, RunLogs, ScenarioOverrides,
    ScenarioReport,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidateRequest {
    pub scenario_toml: String,
    #[serde(default)]
    pub overrides: ScenarioOverrides,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidateResponse {
    pub valid: bool,
    #[serde(default)]
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRequest {
    pub scenario_toml: String,
    #[serde(default)]
    pub overrides: ScenarioOverrides,
    /// Include the per-seed CSV logs in the response (they dominate the
    /// payload size).
    #[serde(default)]
    pub include_logs: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedOutput {
    pub seed: u64,
    pub diagnostics: RunDiagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub logs: Option<RunLogs>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResponse {
    pub report: ScenarioReport,
    pub seeds: Vec<SeedOutput>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkRequest {
    pub n_list: Vec<usize>,
    pub repeats: usize,
    #[serde(default = "default_benchmark_seed")]
    pub seed: u64,
    /// Accept swarm sizes beyond 10 despite the factorial runtime.
    #[serde(default)]
    pub allow_large: bool,
}

fn default_benchmark_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkResponse {
    pub rows: Vec<BenchmarkRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplayRequest {
    /// Scenario TOML whose `[swarm]` section configures the estimator.
    pub scenario_toml: String,
    pub vision_csv: String,
    pub uwb_csv: String,
    pub vio_csv: String,
    #[serde(default)]
    pub truth_csv: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplayResponse {
    pub estimates_csv: String,
    pub report: ReplayReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobState {
    Queued,
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobSubmitted {
    pub id: Uuid,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobStatus {
    pub id: Uuid,
    pub state: JobState,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<RunResponse>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobList {
    pub jobs: Vec<JobStatus>,
}

/// Error payload returned with non-2xx statuses.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn requests_round_trip_through_json() {
        let request = RunRequest {
            scenario_toml: "name = \"x\"".into(),
            overrides: ScenarioOverrides {
                mode: Some(Mode::Fixed),
                velocity_mps: Some(2.0),
                seeds: Some(vec![1, 2]),
                ablations: Some([Ablation::NoUwb].into()),
            },
            include_logs: true,
        };
        let text = serde_json::to_string(&request).unwrap();
        assert!(text.contains("\"fixed\""));
        assert!(text.contains("no_uwb"));
        let back: RunRequest = serde_json::from_str(&text).unwrap();
        assert_eq!(back.overrides.seeds, Some(vec![1, 2]));

        // Missing optional fields take their defaults.
        let minimal: RunRequest =
            serde_json::from_str("{\"scenario_toml\": \"name = \\\"y\\\"\"}").unwrap();
        assert!(!minimal.include_logs);
        assert!(minimal.overrides.mode.is_none());
    }

    #[test]
    fn job_states_use_snake_case() {
        assert_eq!(serde_json::to_string(&JobState::Running).unwrap(), "\"running\"");
        let status = JobStatus {
            id: Uuid::nil(),
            state: JobState::Failed,
            result: None,
            error: Some("boom".into()),
        };
        let text = serde_json::to_string(&status).unwrap();
        assert!(!text.contains("result"), "skipped when absent: {text}");
        let back: JobStatus = serde_json::from_str(&text).unwrap();
        assert_eq!(back.state, JobState::Failed);
    }
}
