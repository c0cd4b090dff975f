//! Visual-inertial odometry synthesis.
//!
//! Each drone integrates its own motion. The reported displacement is the
//! true displacement since the channel started plus an accumulated
//! random-walk drift whose per-sample increment scales with speed, so drift
//! grows with distance traveled. White noise on top models the jitter of
//! individual readings without being integrated.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use swarm_core::{DroneId, Timestamp, Vec3, VioConfig, WorldState};

use crate::types::VioSample;

#[derive(Debug, Clone)]
pub struct VioChannel {
    drone: DroneId,
    origin: Vec3,
    drift: Vec3,
}

impl VioChannel {
    /// Starts integrating at the drone's current true position.
    pub fn new(world: &WorldState, drone: DroneId) -> Self {
        VioChannel { drone, origin: world.state(drone).position, drift: Vec3::ZERO }
    }

    /// Produces the sample for the current tick. `dt` is the time since the
    /// previous sample (the channel's own period).
    pub fn sample(
        &mut self,
        world: &WorldState,
        cfg: &VioConfig,
        dt: f64,
        tick_dt: f64,
        rng: &mut impl Rng,
    ) -> VioSample {
        let state = world.state(self.drone);
        let speed = state.velocity.norm();
        // Diffusion per meter traveled: each sample adds variance
        // drift_per_meter^2 * (distance covered since the last sample), so
        // the accumulated drift std is drift_per_meter * sqrt(distance)
        // independent of the sampling rate.
        let drift_sigma = cfg.drift_per_meter * (speed * dt).sqrt();
        if drift_sigma > 0.0 {
            let normal = Normal::new(0.0, drift_sigma).expect("sigma > 0");
            self.drift += Vec3::new(normal.sample(rng), normal.sample(rng), normal.sample(rng));
        }

        let mut displacement = state.position - self.origin + self.drift;
        if cfg.white_noise_m > 0.0 {
            let white = Normal::new(0.0, cfg.white_noise_m).expect("sigma > 0");
            displacement += Vec3::new(white.sample(rng), white.sample(rng), white.sample(rng));
        }
        let mut velocity = state.velocity;
        if cfg.velocity_noise_mps > 0.0 {
            let vel = Normal::new(0.0, cfg.velocity_noise_mps).expect("sigma > 0");
            velocity += Vec3::new(vel.sample(rng), vel.sample(rng), vel.sample(rng));
        }

        VioSample {
            drone: self.drone,
            displacement,
            velocity,
            timestamp: Timestamp::at(world.tick, tick_dt),
        }
    }
}
