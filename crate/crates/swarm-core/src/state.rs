//! Drone identity, the tick clock and ground-truth world state.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::vec3::Vec3;

/// Index of a drone within the swarm, in `[0, n_drones)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DroneId(pub usize);

impl DroneId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for DroneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A point on the fixed-step tick clock. `dt` is the seconds-per-tick of the
/// run that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timestamp {
    pub tick: u64,
    pub dt: f64,
}

impl Timestamp {
    pub fn at(tick: u64, dt: f64) -> Self {
        Timestamp { tick, dt }
    }

    pub fn seconds(self) -> f64 {
        self.tick as f64 * self.dt
    }
}

/// Ground-truth state of a single drone.
///
/// `camera_angle` is the servo angle of the one-DOF camera, measured in the
/// body frame relative to the heading. `yaw` stays zero in compass-aligned
/// flight but is kept explicit so the geometry helpers stay general.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DroneState {
    pub id: DroneId,
    pub position: Vec3,
    pub velocity: Vec3,
    pub yaw: f64,
    pub camera_angle: f64,
}

impl DroneState {
    pub fn at_rest(id: DroneId, position: Vec3) -> Self {
        DroneState { id, position, velocity: Vec3::ZERO, yaw: 0.0, camera_angle: 0.0 }
    }
}

/// Ground truth for the whole swarm at one tick.
#[derive(Debug, Clone)]
pub struct WorldState {
    pub tick: u64,
    pub states: Vec<DroneState>,
}

impl WorldState {
    pub fn new(states: Vec<DroneState>) -> Self {
        WorldState { tick: 0, states }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, id: DroneId) -> &DroneState {
        &self.states[id.index()]
    }

    pub fn state_mut(&mut self, id: DroneId) -> &mut DroneState {
        &mut self.states[id.index()]
    }

    pub fn ids(&self) -> impl Iterator<Item = DroneId> {
        (0..self.states.len()).map(DroneId)
    }

    /// True relative position of `target` as seen from `observer`'s local
    /// frame. Local frames are yaw-aligned with the global frame, so this is
    /// a plain difference.
    pub fn relative_position(&self, observer: DroneId, target: DroneId) -> Vec3 {
        self.state(target).position - self.state(observer).position
    }
}
