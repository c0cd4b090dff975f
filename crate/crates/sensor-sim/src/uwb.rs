//! Pairwise range synthesis.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use swarm_core::{DroneId, Timestamp, UwbConfig, WorldState};

use crate::types::UwbRange;

/// One range reading for the unordered pair `(a, b)` at the current tick.
///
/// Gaussian range noise, plus an occasional interference outlier offset
/// drawn uniformly from the configured band with random sign. Readings clamp
/// at zero.
pub fn simulate_uwb(
    world: &WorldState,
    a: DroneId,
    b: DroneId,
    cfg: &UwbConfig,
    dt: f64,
    rng: &mut impl Rng,
) -> UwbRange {
    let truth = world.state(a).position.distance(world.state(b).position);
    let mut distance = truth;
    if cfg.noise_std_m > 0.0 {
        distance += Normal::new(0.0, cfg.noise_std_m).expect("std > 0").sample(rng);
    }
    if cfg.outlier_prob > 0.0 && rng.random_bool(cfg.outlier_prob) {
        let magnitude = rng.random_range(cfg.outlier_min_m..=cfg.outlier_max_m);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        distance += sign * magnitude;
    }
    UwbRange { a, b, distance: distance.max(0.0), timestamp: Timestamp::at(world.tick, dt) }
}
