//! HTTP/JSON service around the simulation harness.
//!
//! Scenario runs are CPU-bound and can take minutes for multi-seed sweeps,
//! so the service offers both synchronous endpoints and a small job API:
//! submit a scenario, poll its status, fetch the result. All compute runs on
//! blocking worker threads; the async side only shuffles JSON.
//!
//! Routes (all under `/api/v1` except the health probe):
//!
//! * `GET  /healthz`            - liveness
//! * `POST /api/v1/validate`    - parse + validate a scenario
//! * `POST /api/v1/run`         - run a scenario synchronously
//! * `POST /api/v1/jobs`        - submit a scenario as a background job
//! * `GET  /api/v1/jobs`        - list jobs
//! * `GET  /api/v1/jobs/{id}`   - poll one job
//! * `POST /api/v1/benchmark-gap` - time the attention planner
//! * `POST /api/v1/replay`      - re-estimate from measurement logs

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use harness::{gap_benchmark, replay, run_scenario, Scenario};
use swarm_api::{
    BenchmarkRequest, BenchmarkResponse, ErrorBody, JobList, JobState, JobStatus, JobSubmitted,
    ReplayRequest, ReplayResponse, RunRequest, RunResponse, ScenarioOverrides, SeedOutput,
    ValidateRequest, ValidateResponse,
};
use uuid::Uuid;

struct JobEntry {
    seq: u64,
    status: JobStatus,
}

#[derive(Clone, Default)]
pub struct AppState {
    jobs: Arc<Mutex<BTreeMap<Uuid, JobEntry>>>,
    counter: Arc<Mutex<u64>>,
}

enum ApiError {
    BadRequest(String),
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, error) = match self {
            ApiError::BadRequest(e) => (StatusCode::BAD_REQUEST, e),
            ApiError::Internal(e) => (StatusCode::INTERNAL_SERVER_ERROR, e),
        };
        (status, Json(ErrorBody { error })).into_response()
    }
}

fn parse_scenario(toml: &str, overrides: &ScenarioOverrides) -> Result<Scenario, String> {
    let mut scenario = Scenario::from_toml(toml).map_err(|e| e.to_string())?;
    scenario.apply(overrides);
    scenario.validate().map_err(|e| e.to_string())?;
    Ok(scenario)
}

fn run_to_response(scenario: &Scenario, include_logs: bool) -> Result<RunResponse, String> {
    let run = run_scenario(scenario).map_err(|e| e.to_string())?;
    let seeds = run
        .outputs
        .iter()
        .map(|o| SeedOutput {
            seed: o.metrics.seed,
            diagnostics: o.diagnostics,
            logs: include_logs.then(|| o.logs.clone()),
        })
        .collect();
    Ok(RunResponse { report: run.report, seeds })
}

async fn healthz() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn validate(Json(request): Json<ValidateRequest>) -> Json<ValidateResponse> {
    match parse_scenario(&request.scenario_toml, &request.overrides) {
        Ok(_) => Json(ValidateResponse { valid: true, errors: vec![] }),
        Err(e) => Json(ValidateResponse {
            valid: false,
            errors: e.lines().map(str::to_string).collect(),
        }),
    }
}

async fn run(Json(request): Json<RunRequest>) -> Result<Json<RunResponse>, ApiError> {
    let scenario =
        parse_scenario(&request.scenario_toml, &request.overrides).map_err(ApiError::BadRequest)?;
    let response = tokio::task::spawn_blocking(move || run_to_response(&scenario, request.include_logs))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
        .map_err(ApiError::Internal)?;
    Ok(Json(response))
}

async fn submit_job(
    State(state): State<AppState>,
    Json(request): Json<RunRequest>,
) -> Result<(StatusCode, Json<JobSubmitted>), ApiError> {
    let scenario =
        parse_scenario(&request.scenario_toml, &request.overrides).map_err(ApiError::BadRequest)?;
    let id = Uuid::new_v4();
    {
        let mut counter = state.counter.lock().unwrap();
        *counter += 1;
        state.jobs.lock().unwrap().insert(
            id,
            JobEntry {
                seq: *counter,
                status: JobStatus { id, state: JobState::Queued, result: None, error: None },
            },
        );
    }

    let jobs = state.jobs.clone();
    tokio::spawn(async move {
        if let Some(entry) = jobs.lock().unwrap().get_mut(&id) {
            entry.status.state = JobState::Running;
        }
        let outcome =
            tokio::task::spawn_blocking(move || run_to_response(&scenario, request.include_logs))
                .await;
        let mut jobs = jobs.lock().unwrap();
        let Some(entry) = jobs.get_mut(&id) else { return };
        match outcome {
            Ok(Ok(response)) => {
                entry.status.state = JobState::Done;
                entry.status.result = Some(response);
            }
            Ok(Err(e)) => {
                entry.status.state = JobState::Failed;
                entry.status.error = Some(e);
            }
            Err(e) => {
                entry.status.state = JobState::Failed;
                entry.status.error = Some(e.to_string());
            }
        }
    });

    Ok((StatusCode::ACCEPTED, Json(JobSubmitted { id })))
}

async fn job_status(
    State(state): State<AppState>,
    Path(id): Path<Uuid>,
) -> Result<Json<JobStatus>, ApiError> {
    state
        .jobs
        .lock()
        .unwrap()
        .get(&id)
        .map(|entry| Json(entry.status.clone()))
        .ok_or_else(|| ApiError::BadRequest(format!("unknown job {id}")))
}

async fn job_list(State(state): State<AppState>) -> Json<JobList> {
    let jobs = state.jobs.lock().unwrap();
    let mut entries: Vec<&JobEntry> = jobs.values().collect();
    entries.sort_by_key(|e| e.seq);
    Json(JobList { jobs: entries.into_iter().map(|e| e.status.clone()).collect() })
}

async fn benchmark(
    Json(request): Json<BenchmarkRequest>,
) -> Result<Json<BenchmarkResponse>, ApiError> {
    let rows = tokio::task::spawn_blocking(move || {
        gap_benchmark(&request.n_list, request.repeats, request.seed, request.allow_large)
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))?
    .map_err(|e| ApiError::BadRequest(e.to_string()))?;
    Ok(Json(BenchmarkResponse { rows }))
}

async fn replay_logs(Json(request): Json<ReplayRequest>) -> Result<Json<ReplayResponse>, ApiError> {
    let scenario = parse_scenario(&request.scenario_toml, &ScenarioOverrides::default())
        .map_err(ApiError::BadRequest)?;
    let output = tokio::task::spawn_blocking(move || {
        replay(
            &scenario.swarm,
            &request.vision_csv,
            &request.uwb_csv,
            &request.vio_csv,
            request.truth_csv.as_deref(),
        )
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))?
    .map_err(|e| ApiError::BadRequest(e.to_string()))?;
    Ok(Json(ReplayResponse { estimates_csv: output.estimates_csv, report: output.report }))
}

pub fn router() -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/api/v1/validate", post(validate))
        .route("/api/v1/run", post(run))
        .route("/api/v1/jobs", post(submit_job).get(job_list))
        .route("/api/v1/jobs/{id}", get(job_status))
        .route("/api/v1/benchmark-gap", post(benchmark))
        .route("/api/v1/replay", post(replay_logs))
        // Replay requests carry whole measurement logs inline.
        .layer(axum::extract::DefaultBodyLimit::max(256 * 1024 * 1024))
        .with_state(AppState::default())
}

/// Serves the API on the given listener until the task is dropped.
pub async fn serve(listener: tokio::net::TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router()).await
}
