//! Estimation and formation metrics.
//!
//! Everything in a report is a pure function of the simulated data, so
//! identical runs serialize to byte-identical JSON. Wall-clock solver
//! timings live in the run diagnostics instead, which are excluded from the
//! determinism contract.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use swarm_core::{wrap_angle, DroneId, Vec3};

use crate::scenario::{Ablation, Mode};
use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisStats {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Per-axis RMSE and error standard deviation of one ordered pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAxisStats {
    pub owner: DroneId,
    pub target: DroneId,
    pub rmse: AxisStats,
    pub samples: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub frames: u64,
    pub mean_iterations: f64,
    pub max_iterations: usize,
    pub converged_fraction: f64,
}

/// Metrics of a single seeded run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub seed: u64,
    pub mode: Mode,
    pub velocity_mps: f64,
    pub diverged: bool,
    /// RMSE over all ordered pairs, per axis.
    pub rmse: AxisStats,
    /// Standard deviation of the per-axis errors around their mean.
    pub error_std: AxisStats,
    pub pair_rmse: Vec<PairAxisStats>,
    /// Mean absolute formation-angle error over the flight, degrees,
    /// excluding the reference drone.
    pub mean_abs_angle_error_deg: f64,
    pub per_drone_mean_abs_angle_error_deg: Vec<f64>,
    /// Fraction of flight vision ticks that produced a detection.
    pub detection_duty_cycle: f64,
    pub solver: SolverStats,
}

/// Seed-aggregated metrics of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub seeds: u64,
    pub mean_rmse: AxisStats,
    pub mean_abs_angle_error_deg: f64,
    pub mean_detection_duty_cycle: f64,
    pub any_diverged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub mode: Mode,
    pub ablations: BTreeSet<Ablation>,
    pub velocity_mps: f64,
    pub duration_s: f64,
    pub aggregate: AggregateMetrics,
    pub per_seed: Vec<MetricsReport>,
}

impl ScenarioReport {
    /// The canonical JSON summary; byte-identical for identical
    /// (scenario, seeds).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

pub(crate) fn aggregate(reports: &[MetricsReport]) -> AggregateMetrics {
    let n = reports.len().max(1) as f64;
    let mean = |f: &dyn Fn(&MetricsReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    AggregateMetrics {
        seeds: reports.len() as u64,
        mean_rmse: AxisStats {
            x: mean(&|r| r.rmse.x),
            y: mean(&|r| r.rmse.y),
            z: mean(&|r| r.rmse.z),
        },
        mean_abs_angle_error_deg: mean(&|r| r.mean_abs_angle_error_deg),
        mean_detection_duty_cycle: mean(&|r| r.detection_duty_cycle),
        any_diverged: reports.iter().any(|r| r.diverged),
    }
}

/// Per-axis RMSE and standard deviation of a set of error vectors.
pub fn rmse_per_axis(errors: &[Vec3]) -> (AxisStats, AxisStats) {
    if errors.is_empty() {
        let zero = AxisStats { x: 0.0, y: 0.0, z: 0.0 };
        return (zero, zero);
    }
    let n = errors.len() as f64;
    let mut sq = Vec3::ZERO;
    let mut mean = Vec3::ZERO;
    for e in errors {
        sq += Vec3::new(e.x * e.x, e.y * e.y, e.z * e.z);
        mean += *e;
    }
    mean = mean / n;
    let rmse = AxisStats { x: (sq.x / n).sqrt(), y: (sq.y / n).sqrt(), z: (sq.z / n).sqrt() };
    let mut var = Vec3::ZERO;
    for e in errors {
        let d = *e - mean;
        var += Vec3::new(d.x * d.x, d.y * d.y, d.z * d.z);
    }
    let std = AxisStats {
        x: (var.x / n).sqrt(),
        y: (var.y / n).sqrt(),
        z: (var.z / n).sqrt(),
    };
    (rmse, std)
}

/// Angle of every drone about the swarm centroid, measured counterclockwise
/// from the reference drone's ray, in degrees within `[0, 360)`.
pub fn formation_angles(positions: &[Vec3], reference: DroneId) -> Result<Vec<f64>, HarnessError> {
    if positions.len() < 3 {
        return Err(HarnessError::Invalid("formation angles need at least 3 drones".into()));
    }
    let mut centroid = Vec3::ZERO;
    for &p in positions {
        centroid += p;
    }
    centroid = centroid / positions.len() as f64;
    for (i, &p) in positions.iter().enumerate() {
        if (p - centroid).norm_xy() < 1e-9 {
            return Err(HarnessError::Invalid(format!(
                "drone {i} coincides with the swarm centroid; angle undefined"
            )));
        }
    }
    let angle_of = |p: Vec3| (p.y - centroid.y).atan2(p.x - centroid.x);
    let datum = angle_of(positions[reference.index()]);
    Ok(positions
        .iter()
        .map(|&p| {
            let a = wrap_angle(angle_of(p) - datum).to_degrees();
            if a < 0.0 {
                a + 360.0
            } else {
                a
            }
        })
        .collect())
}

/// Signed deviation of each drone's formation angle from the ideal even
/// spacing, in degrees within `[-180, 180)`. The reference drone's error is
/// zero by construction.
pub fn formation_angle_errors(positions: &[Vec3], reference: DroneId) -> Result<Vec<f64>, HarnessError> {
    let n = positions.len();
    let angles = formation_angles(positions, reference)?;
    Ok(angles
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            // Ideal spacing relative to the reference drone's slot.
            let slots = (i + n - reference.index()) % n;
            let ideal = 360.0 * slots as f64 / n as f64;
            wrap_angle((a - ideal).to_radians()).to_degrees()
        })
        .collect())
}
