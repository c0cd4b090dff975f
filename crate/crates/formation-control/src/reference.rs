//! Reference trajectory generation for circular formations.

use serde::{Deserialize, Serialize};
use swarm_core::Vec3;

/// Per-drone reference position, velocity and acceleration in the global
/// frame, consistent by differentiation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceState {
    pub positions: Vec<Vec3>,
    pub velocities: Vec<Vec3>,
    pub accelerations: Vec<Vec3>,
}

/// Evenly spaced circle that spins up from standstill: the tangential speed
/// ramps linearly to `speed` over `ramp_s`, then holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircularFormation {
    pub n_drones: usize,
    pub radius: f64,
    pub speed: f64,
    pub ramp_s: f64,
    pub center: Vec3,
}

impl CircularFormation {
    /// Angular state at time `t`: (theta, omega, omega_dot).
    fn angular_state(&self, t: f64) -> (f64, f64, f64) {
        let target_omega = self.speed / self.radius;
        if self.ramp_s <= 0.0 || t >= self.ramp_s {
            let theta_ramp = if self.ramp_s <= 0.0 { 0.0 } else { 0.5 * target_omega * self.ramp_s };
            let t_steady = if self.ramp_s <= 0.0 { t } else { t - self.ramp_s };
            (theta_ramp + target_omega * t_steady, target_omega, 0.0)
        } else {
            let omega_dot = target_omega / self.ramp_s;
            (0.5 * omega_dot * t * t, omega_dot * t, omega_dot)
        }
    }

    pub fn reference(&self, t: f64) -> ReferenceState {
        let (theta, omega, omega_dot) = self.angular_state(t);
        let mut positions = Vec::with_capacity(self.n_drones);
        let mut velocities = Vec::with_capacity(self.n_drones);
        let mut accelerations = Vec::with_capacity(self.n_drones);
        for i in 0..self.n_drones {
            let phase = std::f64::consts::TAU * i as f64 / self.n_drones as f64 + theta;
            let (sin, cos) = phase.sin_cos();
            positions.push(self.center + Vec3::new(self.radius * cos, self.radius * sin, 0.0));
            velocities.push(Vec3::new(-self.radius * omega * sin, self.radius * omega * cos, 0.0));
            // Tangential (spin-up) plus centripetal components.
            accelerations.push(Vec3::new(
                -self.radius * (omega_dot * sin + omega * omega * cos),
                self.radius * (omega_dot * cos - omega * omega * sin),
                0.0,
            ));
        }
        ReferenceState { positions, velocities, accelerations }
    }
}

/// Reference for `n_drones` on a circle at time `t`.
pub fn circular_reference(
    t: f64,
    radius: f64,
    speed: f64,
    ramp_s: f64,
    n_drones: usize,
    center: Vec3,
) -> ReferenceState {
    CircularFormation { n_drones, radius, speed, ramp_s, center }.reference(t)
}
