//! Offline re-estimation from measurement logs.
//!
//! Replay feeds logged measurements back through the per-drone localizers
//! without the simulator: every drone sees the complete log (lossless
//! offline view), and the range series are smoothed with the classical
//! centered Savitzky-Golay variant since future samples are available.

use std::collections::BTreeMap;

use estimator::{sg_filter, Ablations, RelativeLocalizer, SgMode};
use sensor_sim::{BusMessage, Payload, UwbRange, VioSample, VisionDetection};
use serde::{Deserialize, Serialize};
use swarm_core::{DroneId, SwarmConfig, Timestamp, Vec3};

use crate::logs::{
    read_truth_csv, read_uwb_csv, read_vio_csv, read_vision_csv, write_csv, EstimateRow,
};
use crate::metrics::{rmse_per_axis, AxisStats};
use crate::HarnessError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplayReport {
    pub frames: u64,
    pub mean_iterations: f64,
    pub converged_fraction: f64,
    /// Per-axis RMSE against the truth log, when one was supplied.
    pub rmse: Option<AxisStats>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplayOutput {
    pub estimates_csv: String,
    pub report: ReplayReport,
}

/// Re-runs the estimator over logged measurements.
pub fn replay(
    cfg: &SwarmConfig,
    vision_csv: &str,
    uwb_csv: &str,
    vio_csv: &str,
    truth_csv: Option<&str>,
) -> Result<ReplayOutput, HarnessError> {
    cfg.validate()?;
    let vision = read_vision_csv(vision_csv)?;
    let uwb = read_uwb_csv(uwb_csv)?;
    let vio = read_vio_csv(vio_csv)?;
    let truth = truth_csv.map(read_truth_csv).transpose()?;

    let n = cfg.n_drones;
    let dt = cfg.dt_s;
    let init_ticks = cfg.init_ticks();
    let estimator_period = cfg.estimator_period();
    let max_tick = vision
        .iter()
        .map(|r| r.tick)
        .chain(uwb.iter().map(|r| r.tick))
        .chain(vio.iter().map(|r| r.tick))
        .max()
        .ok_or_else(|| HarnessError::Invalid("measurement logs are empty".into()))?;

    // Centered smoothing of each pair's range series over the whole log.
    let mut range_series: BTreeMap<(usize, usize), Vec<(u64, f64)>> = BTreeMap::new();
    for row in &uwb {
        let key = (row.drone_a.min(row.drone_b), row.drone_a.max(row.drone_b));
        range_series.entry(key).or_default().push((row.tick, row.distance));
    }
    let mut filtered_ranges: BTreeMap<(usize, usize), Vec<(u64, f64)>> = BTreeMap::new();
    for (key, series) in &range_series {
        let values: Vec<f64> = series.iter().map(|(_, d)| *d).collect();
        let smooth = sg_filter(&values, cfg.estimator.sg_window, cfg.estimator.sg_order, SgMode::Centered)
            .map_err(|e| HarnessError::Invalid(e.to_string()))?;
        filtered_ranges.insert(
            *key,
            series.iter().zip(smooth).map(|(&(t, _), s)| (t, s)).collect(),
        );
    }

    // Ranges are pre-filtered here, so the localizers run with an identity
    // smoothing window.
    let mut est_cfg = cfg.estimator.clone();
    est_cfg.sg_window = 1;
    est_cfg.sg_order = 0;
    let mut localizers: Vec<RelativeLocalizer> = (0..n)
        .map(|i| RelativeLocalizer::new(DroneId(i), n, est_cfg.clone(), Ablations::default()))
        .collect();

    // Group rows by tick for the sweep.
    let mut vision_by_tick: BTreeMap<u64, Vec<&crate::logs::VisionRow>> = BTreeMap::new();
    for row in &vision {
        vision_by_tick.entry(row.tick).or_default().push(row);
    }
    let mut ranges_by_tick: BTreeMap<u64, Vec<(usize, usize, f64)>> = BTreeMap::new();
    for (key, series) in &filtered_ranges {
        for &(tick, d) in series {
            ranges_by_tick.entry(tick).or_default().push((key.0, key.1, d));
        }
    }
    let mut vio_by_tick: BTreeMap<u64, Vec<&crate::logs::VioRow>> = BTreeMap::new();
    for row in &vio {
        vio_by_tick.entry(row.tick).or_default().push(row);
    }
    let truth_by_tick: Option<BTreeMap<(u64, usize), Vec3>> = truth.map(|rows| {
        rows.iter().map(|r| ((r.tick, r.drone), r.position())).collect()
    });

    let mut estimate_rows: Vec<EstimateRow> = Vec::new();
    let mut errors: Vec<Vec3> = Vec::new();
    let mut frames = 0u64;
    let mut iterations_sum = 0usize;
    let mut converged = 0u64;

    for tick in 0..=max_tick + 1 {
        if tick == init_ticks {
            for localizer in &mut localizers {
                localizer.finish_initialization()?;
            }
        }

        // Same frame cadence as the online pipeline: solve the frame about
        // the previous tick before ingesting the current one.
        if tick > init_ticks && (tick - 1 - init_ticks) % estimator_period == 0 {
            let frame_tick = tick - 1;
            for i in 0..n {
                let (estimate, report) = localizers[i].estimate_step(frame_tick, dt);
                frames += 1;
                iterations_sum += report.iterations;
                converged += report.converged as u64;
                for (&target, entry) in &estimate.entries {
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
                    if let Some(truth) = &truth_by_tick {
                        if let (Some(&tp), Some(&op)) =
                            (truth.get(&(frame_tick, target.index())), truth.get(&(frame_tick, i)))
                        {
                            errors.push(entry.relative_position - (tp - op));
                        }
                    }
                }
            }
        }
        if tick > max_tick {
            break;
        }

        // Lossless offline view: every drone ingests everything.
        if let Some(rows) = vision_by_tick.get(&tick) {
            for row in rows {
                let det = VisionDetection {
                    observer: DroneId(row.observer),
                    target: DroneId(row.target),
                    relative_position: row.relative_position(),
                    timestamp: Timestamp::at(tick, dt),
                };
                localizers[row.observer].observe(det);
                let msg = BusMessage {
                    sender: det.observer,
                    payload: Payload::Vision(det),
                    timestamp: det.timestamp,
                };
                for (i, localizer) in localizers.iter_mut().enumerate() {
                    if i != row.observer {
                        localizer.receive(&msg);
                    }
                }
            }
        }
        if let Some(rows) = ranges_by_tick.get(&tick) {
            for &(a, b, d) in rows {
                let range = UwbRange {
                    a: DroneId(a),
                    b: DroneId(b),
                    distance: d,
                    timestamp: Timestamp::at(tick, dt),
                };
                localizers[a].range(&range);
                localizers[b].range(&range);
            }
        }
        if let Some(rows) = vio_by_tick.get(&tick) {
            for row in rows {
                let sample = VioSample {
                    drone: DroneId(row.drone),
                    displacement: row.displacement(),
                    velocity: row.velocity(),
                    timestamp: Timestamp::at(tick, dt),
                };
                localizers[row.drone].update_own_vio(sample);
                let msg = BusMessage {
                    sender: sample.drone,
                    payload: Payload::Vio(sample),
                    timestamp: sample.timestamp,
                };
                for (i, localizer) in localizers.iter_mut().enumerate() {
                    if i != row.drone {
                        localizer.receive(&msg);
                    }
                }
            }
        }
    }

    let report = ReplayReport {
        frames,
        mean_iterations: if frames > 0 { iterations_sum as f64 / frames as f64 } else { 0.0 },
        converged_fraction: if frames > 0 { converged as f64 / frames as f64 } else { 1.0 },
        rmse: if errors.is_empty() { None } else { Some(rmse_per_axis(&errors).0) },
    };
    Ok(ReplayOutput { estimates_csv: write_csv(&estimate_rows), report })
}
