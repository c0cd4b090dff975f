//! Active-vision detection model.
//!
//! The camera sits on a one-DOF servo and reports the relative position of
//! its marker-identified target whenever the target falls inside the view
//! cone and range. Detection noise grows linearly with distance, matching
//! the way marker detections degrade away from the observer.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use swarm_core::{wrap_angle, CameraConfig, DroneId, Timestamp, Vec3, WorldState};

use crate::types::VisionDetection;

/// Target bearing inside the camera frame, or `None` when the pair
/// coincides in the horizontal plane.
fn camera_frame_bearing(world: &WorldState, observer: DroneId, target: DroneId) -> Option<f64> {
    let obs = world.state(observer);
    let tgt = world.state(target);
    let dx = tgt.position.x - obs.position.x;
    let dy = tgt.position.y - obs.position.y;
    if dx == 0.0 && dy == 0.0 {
        return None;
    }
    Some(wrap_angle(dy.atan2(dx) - obs.yaw - obs.camera_angle))
}

fn in_view(world: &WorldState, observer: DroneId, target: DroneId, cfg: &CameraConfig) -> bool {
    let Some(bearing) = camera_frame_bearing(world, observer, target) else {
        return false;
    };
    let distance = world.state(target).position.distance(world.state(observer).position);
    bearing.abs() <= cfg.fov_rad() / 2.0 && distance <= cfg.max_range_m
}

/// Attempts a detection of `target` by `observer` at the current tick.
///
/// Absence is a normal outcome: the target may be outside the view cone,
/// beyond range, or lost to misdetection. Visibility never depends on the
/// noise draws.
pub fn simulate_camera(
    world: &WorldState,
    observer: DroneId,
    target: DroneId,
    cfg: &CameraConfig,
    dt: f64,
    rng: &mut impl Rng,
) -> Option<VisionDetection> {
    if !in_view(world, observer, target, cfg) {
        return None;
    }
    if !rng.random_bool(cfg.detect_prob) {
        return None;
    }

    let obs = world.state(observer);
    let relative = world.state(target).position - obs.position;
    // Local frame: rotate the global offset by -yaw (identity while the
    // swarm stays compass-aligned).
    let (sin_yaw, cos_yaw) = obs.yaw.sin_cos();
    let local = Vec3::new(
        cos_yaw * relative.x + sin_yaw * relative.y,
        -sin_yaw * relative.x + cos_yaw * relative.y,
        relative.z,
    );

    let sigma = cfg.noise_floor_m + cfg.noise_per_meter * relative.norm();
    let noisy = if sigma > 0.0 {
        let normal = Normal::new(0.0, sigma).expect("sigma > 0");
        Vec3::new(
            local.x + normal.sample(rng),
            local.y + normal.sample(rng),
            local.z + normal.sample(rng),
        )
    } else {
        local
    };

    Some(VisionDetection {
        observer,
        target,
        relative_position: noisy,
        timestamp: Timestamp::at(world.tick, dt),
    })
}

/// The drone currently closest to the camera axis among all visible ones,
/// ties broken by id. Used by the initialization sweep, where the camera
/// pans the scene before any target assignment exists.
pub fn visible_target(world: &WorldState, observer: DroneId, cfg: &CameraConfig) -> Option<DroneId> {
    let mut best: Option<(f64, DroneId)> = None;
    for target in world.ids() {
        if target == observer || !in_view(world, observer, target, cfg) {
            continue;
        }
        let off_axis = camera_frame_bearing(world, observer, target)
            .expect("in_view implies a defined bearing")
            .abs();
        if best.is_none_or(|(b, _)| off_axis < b) {
            best = Some((off_axis, target));
        }
    }
    best.map(|(_, id)| id)
}

/// Moves the servo toward `desired` at the configured slew rate; the camera
/// cannot teleport between targets.
pub fn slew_toward(current: f64, desired: f64, max_step: f64) -> f64 {
    let delta = desired - current;
    current + delta.clamp(-max_step, max_step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use swarm_core::DroneState;

    fn world_with_target_at(offset: Vec3) -> WorldState {
        WorldState::new(vec![
            DroneState::at_rest(DroneId(0), Vec3::ZERO),
            DroneState::at_rest(DroneId(1), offset),
        ])
    }

    fn noiseless() -> CameraConfig {
        CameraConfig {
            detect_prob: 1.0,
            noise_floor_m: 0.0,
            noise_per_meter: 0.0,
            ..CameraConfig::default()
        }
    }

    #[test]
    fn dead_ahead_target_reports_exact_offset() {
        let world = world_with_target_at(Vec3::new(2.0, 0.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let det =
            simulate_camera(&world, DroneId(0), DroneId(1), &noiseless(), 0.01, &mut rng).unwrap();
        assert_eq!(det.relative_position, Vec3::new(2.0, 0.0, 0.0));
    }

    #[test]
    fn bearing_outside_half_fov_is_invisible() {
        // 80 degrees off a 150 degree FOV camera axis: outside the 75 degree
        // half-angle, regardless of the RNG.
        let b = 80f64.to_radians();
        let world = world_with_target_at(Vec3::new(2.0 * b.cos(), 2.0 * b.sin(), 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert!(simulate_camera(&world, DroneId(0), DroneId(1), &noiseless(), 0.01, &mut rng)
                .is_none());
        }
    }

    #[test]
    fn beyond_range_is_invisible() {
        let world = world_with_target_at(Vec3::new(8.5, 0.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(
            simulate_camera(&world, DroneId(0), DroneId(1), &noiseless(), 0.01, &mut rng).is_none()
        );
    }

    #[test]
    fn servo_angle_shifts_the_view_cone() {
        let mut world = world_with_target_at(Vec3::new(0.0, 2.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // Forward-facing camera cannot see a target at +90 degrees.
        assert!(
            simulate_camera(&world, DroneId(0), DroneId(1), &noiseless(), 0.01, &mut rng).is_none()
        );
        world.state_mut(DroneId(0)).camera_angle = std::f64::consts::FRAC_PI_2;
        let det =
            simulate_camera(&world, DroneId(0), DroneId(1), &noiseless(), 0.01, &mut rng).unwrap();
        assert_eq!(det.relative_position, Vec3::new(0.0, 2.0, 0.0));
    }

    #[test]
    fn visible_target_picks_closest_to_axis() {
        let world = WorldState::new(vec![
            DroneState::at_rest(DroneId(0), Vec3::ZERO),
            DroneState::at_rest(DroneId(1), Vec3::new(2.0, 1.5, 0.0)),
            DroneState::at_rest(DroneId(2), Vec3::new(2.0, 0.1, 0.0)),
            DroneState::at_rest(DroneId(3), Vec3::new(-2.0, 0.0, 0.0)),
        ]);
        assert_eq!(visible_target(&world, DroneId(0), &noiseless()), Some(DroneId(2)));
    }

    #[test]
    fn slew_is_rate_limited() {
        assert_eq!(slew_toward(0.0, 1.0, 0.25), 0.25);
        assert_eq!(slew_toward(0.0, -1.0, 0.25), -0.25);
        assert_eq!(slew_toward(0.5, 0.6, 0.25), 0.6);
    }

    #[test]
    fn coincident_horizontal_pair_never_detects() {
        let world = world_with_target_at(Vec3::new(0.0, 0.0, 1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(
            simulate_camera(&world, DroneId(0), DroneId(1), &noiseless(), 0.01, &mut rng).is_none()
        );
    }
}
