//! The closed-loop scenario runner.
//!
//! One run = a static initialization window followed by formation flight,
//! all on a fixed-step tick clock. Per-tick order matters: bus delivery
//! first (one-tick-old messages), then the estimator frame about the
//! previous tick (so a frame never sees data newer than its own timestamp),
//! then planning, pointing, sensing, control and dynamics.

use std::collections::BTreeMap;
use std::time::Instant;

use estimator::{Ablations, RelativeEstimate, RelativeLocalizer};
use formation_control::{
    control_law, CircularFormation, ControlGains, NeighborEstimate, OwnStateEstimate,
};
use gap_planner::{camera_angle, plan, ObservationAssignment};
use sensor_sim::{
    simulate_camera, simulate_uwb, slew_toward, visible_target, Bus, BusMessage, Payload,
    VioChannel,
};
use serde::{Deserialize, Serialize};
use swarm_core::{seeded_stream, DroneId, DroneState, NeighborMode, PlanSource, Vec3, WorldState};

use crate::logs::{
    drone, write_csv, ControlRow, EstimateRow, PlannerRow, TruthRow, UwbRow, VioRow, VisionRow,
};
use crate::metrics::{aggregate, rmse_per_axis, MetricsReport, PairAxisStats, ScenarioReport, SolverStats};
use crate::scenario::{Ablation, Mode, Scenario};
use crate::HarnessError;

/// Any drone farther than this from the origin aborts the run as diverged.
const DIVERGENCE_LIMIT_M: f64 = 50.0;

/// Per-channel CSV logs of one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunLogs {
    pub truth_csv: String,
    pub vision_csv: String,
    pub uwb_csv: String,
    pub vio_csv: String,
    pub estimates_csv: String,
    pub controls_csv: String,
    pub planner_csv: String,
}

/// Wall-clock diagnostics. Deliberately kept out of [`MetricsReport`]: they
/// vary run to run, while the report must be byte-identical per seed.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub solver_wall_ms_mean: f64,
    pub solver_wall_ms_max: f64,
    pub run_wall_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunOutput {
    pub metrics: MetricsReport,
    pub logs: RunLogs,
    pub diagnostics: RunDiagnostics,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioRun {
    pub report: ScenarioReport,
    pub outputs: Vec<RunOutput>,
}

/// Runs every seed of the scenario and aggregates the reports.
pub fn run_scenario(scenario: &Scenario) -> Result<ScenarioRun, HarnessError> {
    scenario.validate()?;
    let mut outputs = Vec::new();
    for seed in scenario.effective_seeds() {
        outputs.push(run_single(scenario, seed)?);
    }
    let per_seed: Vec<MetricsReport> = outputs.iter().map(|o| o.metrics.clone()).collect();
    let report = ScenarioReport {
        scenario: scenario.name.clone(),
        mode: scenario.mode,
        ablations: scenario.ablations.clone(),
        velocity_mps: scenario.velocity_mps,
        duration_s: scenario.duration_s,
        aggregate: aggregate(&per_seed),
        per_seed,
    };
    Ok(ScenarioRun { report, outputs })
}

/// Triangle-wave servo schedule used during the static initialization
/// window, so every camera pans the whole scene regardless of mode.
fn init_sweep_angle(t: f64, half_range: f64, slew: f64) -> f64 {
    let span = 4.0 * half_range;
    let p = (slew * t + half_range).rem_euclid(span);
    if p <= 2.0 * half_range {
        -half_range + p
    } else {
        3.0 * half_range - p
    }
}

struct SolveSample {
    iterations: usize,
    converged: bool,
    wall_s: f64,
}

/// Runs one seeded closed-loop simulation.
pub fn run_single(scenario: &Scenario, seed: u64) -> Result<RunOutput, HarnessError> {
    scenario.validate()?;
    let run_start = Instant::now();
    let cfg = &scenario.swarm;
    let n = cfg.n_drones;
    let dt = cfg.dt_s;
    let ids: Vec<DroneId> = (0..n).map(DroneId).collect();

    let formation = CircularFormation {
        n_drones: n,
        radius: cfg.formation.radius_m,
        speed: scenario.velocity_mps,
        ramp_s: cfg.formation.ramp_s,
        center: cfg.formation.center,
    };

    // Start on the reference circle, optionally pushed radially outward.
    let reference0 = formation.reference(0.0);
    let start_positions: Vec<Vec3> = reference0
        .positions
        .iter()
        .map(|&p| {
            let radial = p - cfg.formation.center;
            let norm = radial.norm();
            p + radial * (cfg.formation.start_perturbation_m / norm)
        })
        .collect();
    let mut world = WorldState::new(
        ids.iter().map(|&id| DroneState::at_rest(id, start_positions[id.index()])).collect(),
    );

    let ablations = Ablations {
        no_vision: scenario.ablations.contains(&Ablation::NoVision),
        no_uwb: scenario.ablations.contains(&Ablation::NoUwb),
    };
    let mut localizers: Vec<RelativeLocalizer> = ids
        .iter()
        .map(|&id| RelativeLocalizer::new(id, n, cfg.estimator.clone(), ablations))
        .collect();
    let mut vio_channels: Vec<VioChannel> =
        ids.iter().map(|&id| VioChannel::new(&world, id)).collect();
    let mut bus = Bus::new(n, cfg.comm.drop_prob);

    let mut camera_rngs: Vec<_> =
        ids.iter().map(|id| seeded_stream(seed, &format!("camera:{id}"))).collect();
    let mut vio_rngs: Vec<_> =
        ids.iter().map(|id| seeded_stream(seed, &format!("vio:{id}"))).collect();
    let mut uwb_rng = seeded_stream(seed, "uwb");
    let mut bus_rng = seeded_stream(seed, "bus");

    let init_ticks = cfg.init_ticks();
    let flight_ticks = (scenario.duration_s / dt).round() as u64;
    let total_ticks = init_ticks + flight_ticks;
    let camera_period = cfg.camera_period();
    let uwb_period = cfg.uwb_period();
    let vio_period = cfg.vio_period();
    let estimator_period = cfg.estimator_period();
    let control_period = cfg.control_period();
    let planner_period = cfg.planner_period();
    let vio_dt = vio_period as f64 * dt;

    let gains = ControlGains {
        kp: cfg.control.kp,
        kd: cfg.control.kd,
        c_formation: cfg.control.c_formation,
        u_max: cfg.control.u_max,
    };

    let mut assignment: Option<ObservationAssignment> = None;
    let mut last_estimates: Vec<Option<RelativeEstimate>> = vec![None; n];
    let mut controls = vec![Vec3::ZERO; n];

    // In-memory logs.
    let mut truth_rows = Vec::new();
    let mut vision_rows = Vec::new();
    let mut uwb_rows = Vec::new();
    let mut vio_rows = Vec::new();
    let mut estimate_rows = Vec::new();
    let mut control_rows = Vec::new();
    let mut planner_rows = Vec::new();

    // Metric accumulators.
    let mut truth_positions: Vec<Vec<Vec3>> = Vec::with_capacity(total_ticks as usize);
    let mut all_errors: Vec<Vec3> = Vec::new();
    let mut pair_errors: BTreeMap<(DroneId, DroneId), Vec<Vec3>> = BTreeMap::new();
    let mut angle_abs_sums = vec![0.0f64; n];
    let mut angle_samples = 0u64;
    let mut vision_attempts = 0u64;
    let mut vision_successes = 0u64;
    let mut solves: Vec<SolveSample> = Vec::new();
    let mut diverged = false;

    for tick in 0..total_ticks {
        let flight = tick >= init_ticks;
        let flight_t = if flight { (tick - init_ticks) as f64 * dt } else { 0.0 };

        // 1. Deliver everything broadcast one tick ago.
        let inboxes = bus.deliver(&mut bus_rng);
        for (i, inbox) in inboxes.iter().enumerate() {
            for message in inbox {
                localizers[i].receive(message);
            }
        }

        // 2. Close the static window once it ends.
        if tick == init_ticks {
            for localizer in &mut localizers {
                localizer.finish_initialization()?;
            }
        }

        // 3. Solve the estimator frame about the previous tick: its own
        // measurements were ingested last tick and peer data arrived in
        // step 1, so the frame never sees anything newer than itself.
        if flight && tick > init_ticks && (tick - 1 - init_ticks) % estimator_period == 0 {
            let frame_tick = tick - 1;
            let frame_positions = &truth_positions[frame_tick as usize];
            for i in 0..n {
                let (estimate, report) = localizers[i].estimate_step(frame_tick, dt);
                solves.push(SolveSample {
                    iterations: report.iterations,
                    converged: report.converged,
                    wall_s: report.wall_time_s,
                });
                for (&target, entry) in &estimate.entries {
                    let truth_rel = frame_positions[target.index()] - frame_positions[i];
                    let error = entry.relative_position - truth_rel;
                    all_errors.push(error);
                    pair_errors.entry((DroneId(i), target)).or_default().push(error);
                    estimate_rows.push(EstimateRow {
                        tick: frame_tick,
                        owner: i,
                        target: target.index(),
                        est_x: entry.relative_position.x,
                        est_y: entry.relative_position.y,
                        est_z: entry.relative_position.z,
                        stale: entry.stale,
                        iterations: report.iterations,
                        cost: report.final_cost,
                    });
                }
                last_estimates[i] = Some(estimate);
            }
        }

        // 4. Attention planning.
        if flight && (tick - init_ticks) % planner_period == 0 {
            let (positions, velocities): (Vec<Vec3>, Vec<Vec3>) = match cfg.gap.plan_source {
                PlanSource::Current => (
                    world.states.iter().map(|s| s.position).collect(),
                    world.states.iter().map(|s| s.velocity).collect(),
                ),
                PlanSource::Reference => {
                    let r = formation.reference(flight_t);
                    (r.positions.clone(), r.velocities.clone())
                }
            };
            let planned = plan(&positions, &velocities, cfg.gap.gamma1, cfg.gap.gamma2)?;
            for (observer, target) in planned.iter() {
                let cmd = camera_angle(
                    world.state(observer),
                    positions[target.index()],
                    cfg.camera.servo_half_range_rad(),
                )?;
                planner_rows.push(PlannerRow {
                    tick,
                    observer: drone(observer),
                    target: drone(target),
                    camera_cmd: cmd.angle,
                    reachable: cmd.reachable,
                });
            }
            assignment = Some(planned);
        }

        // 5. Servo pointing.
        for i in 0..n {
            let current = world.states[i].camera_angle;
            world.states[i].camera_angle = if !flight {
                // Both modes pan the scene during the static window; the
                // initial positions must become visible from somewhere.
                init_sweep_angle(
                    tick as f64 * dt,
                    cfg.camera.servo_half_range_rad(),
                    cfg.camera.servo_slew_rad_s(),
                )
            } else {
                match scenario.mode {
                    Mode::Fixed => 0.0,
                    Mode::Active => {
                        let desired = assignment.as_ref().and_then(|a| {
                            let target = a.target_of(DroneId(i));
                            let est = localizers[i].current().get(&target)?;
                            let state = world.state(DroneId(i));
                            camera_angle(
                                state,
                                state.position + *est,
                                cfg.camera.servo_half_range_rad(),
                            )
                            .ok()
                            .map(|cmd| cmd.angle)
                        });
                        match desired {
                            Some(d) => slew_toward(current, d, cfg.camera.servo_slew_rad_s() * dt),
                            None => current,
                        }
                    }
                }
            };
        }

        // 6. Sensors fire and broadcast.
        if tick % camera_period == 0 {
            for i in 0..n {
                let target = if flight {
                    assignment.as_ref().map(|a| a.target_of(DroneId(i)))
                } else {
                    visible_target(&world, DroneId(i), &cfg.camera)
                };
                if flight && target.is_some() {
                    vision_attempts += 1;
                }
                if let Some(target) = target {
                    if let Some(det) = simulate_camera(
                        &world,
                        DroneId(i),
                        target,
                        &cfg.camera,
                        dt,
                        &mut camera_rngs[i],
                    ) {
                        if flight {
                            vision_successes += 1;
                        }
                        vision_rows.push(VisionRow {
                            tick,
                            observer: i,
                            target: target.index(),
                            rel_x: det.relative_position.x,
                            rel_y: det.relative_position.y,
                            rel_z: det.relative_position.z,
                        });
                        localizers[i].observe(det);
                        bus.broadcast(BusMessage {
                            sender: DroneId(i),
                            payload: Payload::Vision(det),
                            timestamp: det.timestamp,
                        });
                    }
                }
            }
        }
        if tick % uwb_period == 0 {
            for a in 0..n {
                for b in (a + 1)..n {
                    let r = simulate_uwb(&world, DroneId(a), DroneId(b), &cfg.uwb, dt, &mut uwb_rng);
                    uwb_rows.push(UwbRow { tick, drone_a: a, drone_b: b, distance: r.distance });
                    localizers[a].range(&r);
                    localizers[b].range(&r);
                }
            }
        }
        if tick % vio_period == 0 {
            for i in 0..n {
                let sample =
                    vio_channels[i].sample(&world, &cfg.vio, vio_dt, dt, &mut vio_rngs[i]);
                vio_rows.push(VioRow {
                    tick,
                    drone: i,
                    disp_x: sample.displacement.x,
                    disp_y: sample.displacement.y,
                    disp_z: sample.displacement.z,
                    vel_x: sample.velocity.x,
                    vel_y: sample.velocity.y,
                    vel_z: sample.velocity.z,
                });
                localizers[i].update_own_vio(sample);
                bus.broadcast(BusMessage {
                    sender: DroneId(i),
                    payload: Payload::Vio(sample),
                    timestamp: sample.timestamp,
                });
            }
        }

        // 7. Formation control (zero-order hold between control ticks).
        if flight && (tick - init_ticks) % control_period == 0 {
            let reference = formation.reference(flight_t);
            for i in 0..n {
                let own = OwnStateEstimate {
                    position: start_positions[i] + localizers[i].own_position_offset(),
                    velocity: localizers[i].own_velocity(),
                };
                let neighbor_ids: Vec<DroneId> = match (&assignment, cfg.control.neighbor_mode) {
                    (Some(a), NeighborMode::Graph) => a.neighbors_of(DroneId(i)),
                    _ => ids.iter().copied().filter(|&j| j != DroneId(i)).collect(),
                };
                let neighbors: Vec<NeighborEstimate> = neighbor_ids
                    .iter()
                    .filter_map(|&j| {
                        if let Some(est) = &last_estimates[i] {
                            est.entries.get(&j).map(|e| NeighborEstimate {
                                target: j,
                                relative_position: e.relative_position,
                                stale: e.stale,
                            })
                        } else {
                            localizers[i].current().get(&j).map(|&p| NeighborEstimate {
                                target: j,
                                relative_position: p,
                                stale: false,
                            })
                        }
                    })
                    .collect();
                let out = control_law(DroneId(i), &reference, &own, &neighbors, &gains);
                controls[i] = out.u;
                control_rows.push(ControlRow {
                    tick,
                    drone: i,
                    ux: out.u.x,
                    uy: out.u.y,
                    uz: out.u.z,
                    pd_only: out.pd_only,
                });
            }
        }

        // 8. Log truth and advance the world.
        truth_positions.push(world.states.iter().map(|s| s.position).collect());
        for s in &world.states {
            truth_rows.push(TruthRow {
                tick,
                drone: s.id.index(),
                px: s.position.x,
                py: s.position.y,
                pz: s.position.z,
                vx: s.velocity.x,
                vy: s.velocity.y,
                vz: s.velocity.z,
                yaw: s.yaw,
                camera_angle: s.camera_angle,
            });
        }
        if flight {
            if let Ok(errors) =
                crate::metrics::formation_angle_errors(&truth_positions[tick as usize], DroneId(0))
            {
                for (i, e) in errors.iter().enumerate() {
                    angle_abs_sums[i] += e.abs();
                }
                angle_samples += 1;
            }
            formation_control::step_dynamics(&mut world, &controls, dt);
        } else {
            // Static window: zero input keeps the swarm exactly still.
            formation_control::step_dynamics(&mut world, &vec![Vec3::ZERO; n], dt);
        }

        if world.states.iter().any(|s| !s.position.is_finite() || s.position.norm() > DIVERGENCE_LIMIT_M)
        {
            diverged = true;
            break;
        }
    }

    // Metrics.
    let (rmse, error_std) = rmse_per_axis(&all_errors);
    let pair_rmse = pair_errors
        .iter()
        .map(|(&(owner, target), errors)| {
            let (rmse, _) = rmse_per_axis(errors);
            PairAxisStats { owner, target, rmse, samples: errors.len() as u64 }
        })
        .collect();
    let per_drone_angle: Vec<f64> = angle_abs_sums
        .iter()
        .map(|s| if angle_samples > 0 { s / angle_samples as f64 } else { 0.0 })
        .collect();
    let mean_abs_angle_error_deg = if n > 1 {
        per_drone_angle.iter().skip(1).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    let solver = SolverStats {
        frames: solves.len() as u64,
        mean_iterations: if solves.is_empty() {
            0.0
        } else {
            solves.iter().map(|s| s.iterations as f64).sum::<f64>() / solves.len() as f64
        },
        max_iterations: solves.iter().map(|s| s.iterations).max().unwrap_or(0),
        converged_fraction: if solves.is_empty() {
            1.0
        } else {
            solves.iter().filter(|s| s.converged).count() as f64 / solves.len() as f64
        },
    };
    let metrics = MetricsReport {
        seed,
        mode: scenario.mode,
        velocity_mps: scenario.velocity_mps,
        diverged,
        rmse,
        error_std,
        pair_rmse,
        mean_abs_angle_error_deg,
        per_drone_mean_abs_angle_error_deg: per_drone_angle,
        detection_duty_cycle: if vision_attempts > 0 {
            vision_successes as f64 / vision_attempts as f64
        } else {
            0.0
        },
        solver,
    };

    let wall: Vec<f64> = solves.iter().map(|s| s.wall_s * 1e3).collect();
    let diagnostics = RunDiagnostics {
        solver_wall_ms_mean: if wall.is_empty() { 0.0 } else { wall.iter().sum::<f64>() / wall.len() as f64 },
        solver_wall_ms_max: wall.iter().copied().fold(0.0, f64::max),
        run_wall_s: run_start.elapsed().as_secs_f64(),
    };

    Ok(RunOutput {
        metrics,
        logs: RunLogs {
            truth_csv: write_csv(&truth_rows),
            vision_csv: write_csv(&vision_rows),
            uwb_csv: write_csv(&uwb_rows),
            vio_csv: write_csv(&vio_rows),
            estimates_csv: write_csv(&estimate_rows),
            controls_csv: write_csv(&control_rows),
            planner_csv: write_csv(&planner_rows),
        },
        diagnostics,
    })
}
