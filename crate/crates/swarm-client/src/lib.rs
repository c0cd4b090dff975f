//! Thin async client for the swarm simulation service.

use std::time::Duration;

use swarm_api::{
    BenchmarkRequest, BenchmarkResponse, ErrorBody, JobList, JobState, JobStatus, JobSubmitted,
    ReplayRequest, ReplayResponse, RunRequest, RunResponse, ValidateRequest, ValidateResponse,
};
use thiserror::Error;
use uuid::Uuid;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("transport error: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("service rejected the request ({status}): {message}")]
    Api { status: u16, message: String },
    #[error("job {0} failed: {1}")]
    JobFailed(Uuid, String),
}

#[derive(Debug, Clone)]
pub struct SwarmClient {
    base: String,
    http: reqwest::Client,
}

impl SwarmClient {
    /// Points the client at a service base URL like `http://127.0.0.1:8750`.
    pub fn new(base: impl Into<String>) -> Self {
        let mut base = base.into();
        while base.ends_with('/') {
            base.pop();
        }
        SwarmClient { base, http: reqwest::Client::new() }
    }

    async fn post<Req: serde::Serialize, Resp: serde::de::DeserializeOwned>(
        &self,
        path: &str,
        request: &Req,
    ) -> Result<Resp, ClientError> {
        let response = self.http.post(format!("{}{path}", self.base)).json(request).send().await?;
        Self::decode(response).await
    }

    async fn decode<Resp: serde::de::DeserializeOwned>(
        response: reqwest::Response,
    ) -> Result<Resp, ClientError> {
        let status = response.status();
        if status.is_success() {
            Ok(response.json().await?)
        } else {
            let message = response
                .json::<ErrorBody>()
                .await
                .map(|body| body.error)
                .unwrap_or_else(|_| status.to_string());
            Err(ClientError::Api { status: status.as_u16(), message })
        }
    }

    pub async fn health(&self) -> Result<(), ClientError> {
        let response = self.http.get(format!("{}/healthz", self.base)).send().await?;
        Self::decode::<serde_json::Value>(response).await.map(|_| ())
    }

    pub async fn validate(&self, request: &ValidateRequest) -> Result<ValidateResponse, ClientError> {
        self.post("/api/v1/validate", request).await
    }

    pub async fn run(&self, request: &RunRequest) -> Result<RunResponse, ClientError> {
        self.post("/api/v1/run", request).await
    }

    pub async fn submit_job(&self, request: &RunRequest) -> Result<Uuid, ClientError> {
        let submitted: JobSubmitted = self.post("/api/v1/jobs", request).await?;
        Ok(submitted.id)
    }

    pub async fn job_status(&self, id: Uuid) -> Result<JobStatus, ClientError> {
        let response = self.http.get(format!("{}/api/v1/jobs/{id}", self.base)).send().await?;
        Self::decode(response).await
    }

    pub async fn list_jobs(&self) -> Result<JobList, ClientError> {
        let response = self.http.get(format!("{}/api/v1/jobs", self.base)).send().await?;
        Self::decode(response).await
    }

    /// Polls a job until it finishes, returning its run result.
    pub async fn wait_for_job(&self, id: Uuid, poll: Duration) -> Result<RunResponse, ClientError> {
        loop {
            let status = self.job_status(id).await?;
            match status.state {
                JobState::Done => {
                    return status.result.ok_or_else(|| {
                        ClientError::JobFailed(id, "finished without a result".into())
                    });
                }
                JobState::Failed => {
                    return Err(ClientError::JobFailed(
                        id,
                        status.error.unwrap_or_else(|| "unknown error".into()),
                    ));
                }
                JobState::Queued | JobState::Running => tokio::time::sleep(poll).await,
            }
        }
    }

    pub async fn benchmark(&self, request: &BenchmarkRequest) -> Result<BenchmarkResponse, ClientError> {
        self.post("/api/v1/benchmark-gap", request).await
    }

    pub async fn replay(&self, request: &ReplayRequest) -> Result<ReplayResponse, ClientError> {
        self.post("/api/v1/replay", request).await
    }
}
