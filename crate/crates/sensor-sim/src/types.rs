//! Measurement records and bus payloads.

use serde::{Deserialize, Serialize};
use swarm_core::{DroneId, Timestamp, Vec3};

/// One camera detection of an identified marker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisionDetection {
    pub observer: DroneId,
    pub target: DroneId,
    /// Relative position of the target in the observer's local frame.
    pub relative_position: Vec3,
    pub timestamp: Timestamp,
}

/// One pairwise range reading; a single reading per unordered pair per
/// ranging tick, shared by both endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UwbRange {
    pub a: DroneId,
    pub b: DroneId,
    pub distance: f64,
    pub timestamp: Timestamp,
}

/// One odometry sample: displacement since the sensor started integrating,
/// plus instantaneous velocity, both in the drone's local frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VioSample {
    pub drone: DroneId,
    pub displacement: Vec3,
    pub velocity: Vec3,
    pub timestamp: Timestamp,
}

/// Summary of a relative estimate as shared over the bus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateSummary {
    pub owner: DroneId,
    pub target: DroneId,
    pub relative_position: Vec3,
    pub timestamp: Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Payload {
    Vision(VisionDetection),
    Vio(VioSample),
    Estimate(EstimateSummary),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BusMessage {
    pub sender: DroneId,
    pub payload: Payload,
    pub timestamp: Timestamp,
}
