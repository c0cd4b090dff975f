//! `swarm`: command-line client for the swarm simulation service.
//!
//! Every subcommand talks HTTP/JSON to a service instance. With `--server`
//! it uses a running one; otherwise it spins up an ephemeral in-process
//! server on a loopback port, so single-shot runs need no daemon.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use swarm_api::{
    Ablation, BenchmarkRequest, Mode, ReplayRequest, RunRequest, RunResponse, ScenarioOverrides,
    ValidateRequest,
};
use swarm_client::SwarmClient;

#[derive(Parser)]
#[command(name = "swarm", version, about = "Active-vision swarm simulator")]
struct Cli {
    /// Base URL of a running simulation service (e.g. http://127.0.0.1:8750).
    /// Omitted: an ephemeral in-process service is started for this call.
    #[arg(long, global = true)]
    server: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write reports and CSV logs.
    Run(RunArgs),
    /// Run a mode x velocity grid as parallel jobs and write a plot-ready
    /// aggregate CSV.
    Sweep(SweepArgs),
    /// Time the attention planner across swarm sizes.
    BenchmarkGap(BenchmarkArgs),
    /// Re-run the estimator over logged measurement CSVs.
    Replay(ReplayArgs),
    /// Parse and validate a scenario file.
    ValidateConfig {
        /// Scenario TOML file.
        scenario: PathBuf,
    },
    /// Start the simulation service in the foreground.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8750")]
        addr: String,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario TOML file.
    scenario: PathBuf,
    /// Override the scenario's seed list (repeatable).
    #[arg(long)]
    seed: Vec<u64>,
    /// Override the camera attention mode.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    /// Override the formation speed in m/s.
    #[arg(long)]
    velocity: Option<f64>,
    /// Override the fusion ablations (comma separated: no_uwb,no_vision).
    #[arg(long, value_delimiter = ',')]
    ablate: Option<Vec<String>>,
    /// Where reports and logs are written.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Skip writing the per-seed CSV logs.
    #[arg(long)]
    no_logs: bool,
    /// Submit as a background job and poll, instead of a synchronous call.
    #[arg(long)]
    queue: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Base scenario TOML file.
    scenario: PathBuf,
    /// Formation speeds to sweep (comma separated, m/s).
    #[arg(long, value_delimiter = ',', default_value = "0.5,1.0,1.5,2.0")]
    velocities: Vec<f64>,
    /// Attention modes to sweep (comma separated).
    #[arg(long, value_delimiter = ',', value_parser = parse_mode, default_value = "active,fixed")]
    modes: Vec<Mode>,
    /// Override the scenario's seed list (repeatable).
    #[arg(long)]
    seed: Vec<u64>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Swarm sizes to time (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "4,6,8,10")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    repeats: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Accept sizes beyond 10 despite the factorial runtime.
    #[arg(long)]
    allow_large: bool,
    /// Optional path for the JSON timing table.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    /// Scenario TOML whose [swarm] section configures the estimator.
    #[arg(long)]
    config: PathBuf,
    /// Directory holding vision.csv, uwb.csv, vio.csv and optionally
    /// truth.csv.
    #[arg(long)]
    measurements: PathBuf,
    #[arg(long, default_value = "out/replay")]
    out_dir: PathBuf,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "active" => Ok(Mode::Active),
        "fixed" => Ok(Mode::Fixed),
        other => Err(format!("unknown mode '{other}' (expected active or fixed)")),
    }
}

#[tokio::main]
async fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Serve { addr } => {
            let listener = tokio::net::TcpListener::bind(&addr)
                .await
                .with_context(|| format!("binding {addr}"))?;
            println!("swarm simulation service listening on {}", listener.local_addr()?);
            swarm_server::serve(listener).await?;
            Ok(())
        }
        Command::Run(args) => run(connect(cli.server).await?, args).await,
        Command::Sweep(args) => sweep(connect(cli.server).await?, args).await,
        Command::BenchmarkGap(args) => benchmark(connect(cli.server).await?, args).await,
        Command::Replay(args) => replay(connect(cli.server).await?, args).await,
        Command::ValidateConfig { scenario } => {
            validate(connect(cli.server).await?, &scenario).await
        }
    }
}

/// Connects to the given service, or starts an ephemeral in-process one.
async fn connect(server: Option<String>) -> Result<SwarmClient> {
    let client = match server {
        Some(url) => SwarmClient::new(url),
        None => {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
            let addr = listener.local_addr()?;
            tokio::spawn(async move {
                if let Err(e) = swarm_server::serve(listener).await {
                    eprintln!("embedded service stopped: {e}");
                }
            });
            SwarmClient::new(format!("http://{addr}"))
        }
    };
    for _ in 0..50 {
        if client.health().await.is_ok() {
            return Ok(client);
        }
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
    bail!("simulation service did not become healthy");
}

fn read_scenario(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn overrides_from(args: &RunArgs) -> Result<ScenarioOverrides> {
    let ablations = match &args.ablate {
        None => None,
        Some(list) => {
            let mut set = BTreeSet::new();
            for item in list.iter().filter(|s| !s.is_empty()) {
                set.insert(Ablation::from_str(item).map_err(anyhow::Error::msg)?);
            }
            Some(set)
        }
    };
    Ok(ScenarioOverrides {
        mode: args.mode,
        velocity_mps: args.velocity,
        seeds: if args.seed.is_empty() { None } else { Some(args.seed.clone()) },
        ablations,
    })
}

async fn run(client: SwarmClient, args: RunArgs) -> Result<()> {
    let request = RunRequest {
        scenario_toml: read_scenario(&args.scenario)?,
        overrides: overrides_from(&args)?,
        include_logs: !args.no_logs,
    };
    let response = if args.queue {
        let id = client.submit_job(&request).await?;
        println!("submitted job {id}");
        client.wait_for_job(id, Duration::from_millis(200)).await?
    } else {
        client.run(&request).await?
    };
    write_run_outputs(&args.out_dir, &response)?;
    print_run_summary(&response);
    Ok(())
}

fn write_run_outputs(out_dir: &Path, response: &RunResponse) -> Result<()> {
    let scenario_dir = out_dir.join(&response.report.scenario);
    std::fs::create_dir_all(&scenario_dir)?;
    std::fs::write(
        scenario_dir.join("summary.json"),
        serde_json::to_string_pretty(&response.report)?,
    )?;
    for seed in &response.seeds {
        let seed_dir = scenario_dir.join(format!("seed-{}", seed.seed));
        std::fs::create_dir_all(&seed_dir)?;
        std::fs::write(seed_dir.join("timing.json"), serde_json::to_string_pretty(&seed.diagnostics)?)?;
        if let Some(logs) = &seed.logs {
            for (name, text) in [
                ("truth.csv", &logs.truth_csv),
                ("vision.csv", &logs.vision_csv),
                ("uwb.csv", &logs.uwb_csv),
                ("vio.csv", &logs.vio_csv),
                ("estimates.csv", &logs.estimates_csv),
                ("controls.csv", &logs.controls_csv),
                ("planner.csv", &logs.planner_csv),
            ] {
                std::fs::write(seed_dir.join(name), text)?;
            }
        }
    }
    println!("wrote {}", scenario_dir.display());
    Ok(())
}

fn print_run_summary(response: &RunResponse) {
    let report = &response.report;
    let a = &report.aggregate;
    println!(
        "{} [{} @ {} m/s, {} seed(s)]",
        report.scenario, report.mode, report.velocity_mps, a.seeds,
    );
    println!(
        "  mean rmse x/y/z: {:.4} / {:.4} / {:.4} m",
        a.mean_rmse.x, a.mean_rmse.y, a.mean_rmse.z,
    );
    println!("  mean |formation angle error|: {:.3} deg", a.mean_abs_angle_error_deg);
    println!("  detection duty cycle: {:.3}", a.mean_detection_duty_cycle);
    if a.any_diverged {
        println!("  WARNING: at least one seed diverged");
    }
    for m in &report.per_seed {
        println!(
            "  seed {}: rmse ({:.4}, {:.4}, {:.4}), angle {:.3} deg, duty {:.3}{}",
            m.seed,
            m.rmse.x,
            m.rmse.y,
            m.rmse.z,
            m.mean_abs_angle_error_deg,
            m.detection_duty_cycle,
            if m.diverged { ", DIVERGED" } else { "" },
        );
    }
}

/// Submits the whole mode x velocity grid as background jobs, waits for all
/// of them, and flattens the reports into one plot-ready CSV: one row per
/// (mode, velocity, seed) plus a `mean` row per combination.
async fn sweep(client: SwarmClient, args: SweepArgs) -> Result<()> {
    let scenario_toml = read_scenario(&args.scenario)?;
    let seeds = if args.seed.is_empty() { None } else { Some(args.seed.clone()) };

    let mut jobs = Vec::new();
    for &mode in &args.modes {
        for &velocity in &args.velocities {
            let request = RunRequest {
                scenario_toml: scenario_toml.clone(),
                overrides: ScenarioOverrides {
                    mode: Some(mode),
                    velocity_mps: Some(velocity),
                    seeds: seeds.clone(),
                    ablations: None,
                },
                include_logs: false,
            };
            jobs.push((mode, velocity, client.submit_job(&request).await?));
        }
    }
    println!("submitted {} sweep jobs", jobs.len());

    let mut csv = String::from(
        "scenario,mode,velocity_mps,seed,rmse_x,rmse_y,rmse_z,mean_abs_angle_error_deg,detection_duty_cycle,diverged\n",
    );
    for (mode, velocity, id) in jobs {
        let response = client.wait_for_job(id, Duration::from_millis(200)).await?;
        let report = &response.report;
        for m in &report.per_seed {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                report.scenario,
                mode,
                velocity,
                m.seed,
                m.rmse.x,
                m.rmse.y,
                m.rmse.z,
                m.mean_abs_angle_error_deg,
                m.detection_duty_cycle,
                m.diverged,
            ));
        }
        let a = &report.aggregate;
        csv.push_str(&format!(
            "{},{},{},mean,{},{},{},{},{},{}\n",
            report.scenario,
            mode,
            velocity,
            a.mean_rmse.x,
            a.mean_rmse.y,
            a.mean_rmse.z,
            a.mean_abs_angle_error_deg,
            a.mean_detection_duty_cycle,
            a.any_diverged,
        ));
        println!(
            "  {mode} @ {velocity} m/s: rmse ({:.4}, {:.4}), angle {:.3} deg, duty {:.3}",
            a.mean_rmse.x, a.mean_rmse.y, a.mean_abs_angle_error_deg, a.mean_detection_duty_cycle,
        );
    }
    std::fs::create_dir_all(&args.out_dir)?;
    let path = args.out_dir.join("aggregate.csv");
    std::fs::write(&path, csv)?;
    println!("wrote {}", path.display());
    Ok(())
}

async fn benchmark(client: SwarmClient, args: BenchmarkArgs) -> Result<()> {
    let response = client
        .benchmark(&BenchmarkRequest {
            n_list: args.n,
            repeats: args.repeats,
            seed: args.seed,
            allow_large: args.allow_large,
        })
        .await?;
    println!("{:>4} {:>12} {:>12} {:>12}", "n", "candidates", "mean (s)", "std (s)");
    for row in &response.rows {
        println!(
            "{:>4} {:>12} {:>12.6} {:>12.6}",
            row.n, row.candidates, row.mean_s, row.std_s,
        );
    }
    if let Some(path) = args.out {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, serde_json::to_string_pretty(&response.rows)?)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

async fn replay(client: SwarmClient, args: ReplayArgs) -> Result<()> {
    let read = |name: &str| -> Result<String> {
        std::fs::read_to_string(args.measurements.join(name))
            .with_context(|| format!("reading {}/{name}", args.measurements.display()))
    };
    let truth_path = args.measurements.join("truth.csv");
    let response = client
        .replay(&ReplayRequest {
            scenario_toml: read_scenario(&args.config)?,
            vision_csv: read("vision.csv")?,
            uwb_csv: read("uwb.csv")?,
            vio_csv: read("vio.csv")?,
            truth_csv: truth_path.exists().then(|| read("truth.csv")).transpose()?,
        })
        .await?;
    std::fs::create_dir_all(&args.out_dir)?;
    std::fs::write(args.out_dir.join("estimates.csv"), &response.estimates_csv)?;
    std::fs::write(
        args.out_dir.join("replay-report.json"),
        serde_json::to_string_pretty(&response.report)?,
    )?;
    println!(
        "replayed {} frames, {:.2} mean solver iterations",
        response.report.frames, response.report.mean_iterations,
    );
    if let Some(rmse) = response.report.rmse {
        println!("offline rmse x/y/z: {:.4} / {:.4} / {:.4} m", rmse.x, rmse.y, rmse.z);
    }
    println!("wrote {}", args.out_dir.display());
    Ok(())
}

async fn validate(client: SwarmClient, scenario: &Path) -> Result<()> {
    let response = client
        .validate(&ValidateRequest {
            scenario_toml: read_scenario(scenario)?,
            overrides: ScenarioOverrides::default(),
        })
        .await?;
    if response.valid {
        println!("{}: OK", scenario.display());
        Ok(())
    } else {
        for error in &response.errors {
            eprintln!("{}: {error}", scenario.display());
        }
        std::process::exit(1);
    }
}
