//! The client against a real in-process service.

use std::time::Duration;

use swarm_api::{BenchmarkRequest, RunRequest, ScenarioOverrides, ValidateRequest};
use swarm_client::{ClientError, SwarmClient};

const SCENARIO: &str = r#"
name = "client-smoke"
velocity_mps = 1.0
duration_s = 3.0
seeds = [4]
"#;

async fn client() -> SwarmClient {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move {
        swarm_server::serve(listener).await.unwrap();
    });
    let client = SwarmClient::new(format!("http://{addr}/"));
    client.health().await.unwrap();
    client
}

#[tokio::test]
async fn run_validate_and_benchmark() {
    let client = client().await;

    let validation = client
        .validate(&ValidateRequest {
            scenario_toml: SCENARIO.into(),
            overrides: ScenarioOverrides::default(),
        })
        .await
        .unwrap();
    assert!(validation.valid);

    let run = client
        .run(&RunRequest {
            scenario_toml: SCENARIO.into(),
            overrides: ScenarioOverrides { velocity_mps: Some(1.5), ..Default::default() },
            include_logs: false,
        })
        .await
        .unwrap();
    assert_eq!(run.report.velocity_mps, 1.5);
    assert_eq!(run.report.per_seed.len(), 1);

    let bench = client
        .benchmark(&BenchmarkRequest { n_list: vec![3], repeats: 2, seed: 9, allow_large: false })
        .await
        .unwrap();
    assert_eq!(bench.rows[0].candidates, 2);
}

#[tokio::test]
async fn jobs_resolve_through_wait_for_job() {
    let client = client().await;
    let id = client
        .submit_job(&RunRequest {
            scenario_toml: SCENARIO.into(),
            overrides: ScenarioOverrides::default(),
            include_logs: false,
        })
        .await
        .unwrap();
    let result = client.wait_for_job(id, Duration::from_millis(50)).await.unwrap();
    assert!(!result.report.per_seed[0].diverged);
    assert_eq!(client.list_jobs().await.unwrap().jobs.len(), 1);
}

#[tokio::test]
async fn service_errors_surface_with_status_and_message() {
    let client = client().await;
    let err = client
        .run(&RunRequest {
            scenario_toml: "velocity_mps = 1.0".into(), // missing fields
            overrides: ScenarioOverrides::default(),
            include_logs: false,
        })
        .await
        .unwrap_err();
    match err {
        ClientError::Api { status, message } => {
            assert_eq!(status, 400);
            assert!(!message.is_empty());
        }
        other => panic!("expected an api error, got {other}"),
    }
}
