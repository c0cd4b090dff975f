//! Observation assignments and camera pointing.

use serde::{Deserialize, Serialize};
use swarm_core::{wrap_angle, DroneId, DroneState, Vec3};

use crate::GapError;

/// Who observes whom: a single directed cycle over all drone ids.
///
/// `targets[i]` is the drone observed by drone `i`. The constructor rejects
/// anything that is not a fixed-point-free single N-cycle, which is the
/// entire search space left after pruning.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationAssignment {
    targets: Vec<DroneId>,
}

impl ObservationAssignment {
    pub fn new(targets: Vec<DroneId>) -> Result<Self, GapError> {
        let n = targets.len();
        if n < 2 {
            return Err(GapError::TooFewDrones(n));
        }
        for (observer, &target) in targets.iter().enumerate() {
            if target.index() >= n {
                return Err(GapError::TargetOutOfRange { observer: DroneId(observer), target });
            }
            if target.index() == observer {
                return Err(GapError::FixedPoint(DroneId(observer)));
            }
        }
        // Walk the cycle from drone 0; it must return to 0 after exactly n
        // hops having visited every drone once.
        let mut visited = vec![false; n];
        let mut current = 0usize;
        for _ in 0..n {
            if visited[current] {
                return Err(GapError::NotASingleCycle);
            }
            visited[current] = true;
            current = targets[current].index();
        }
        if current != 0 || visited.iter().any(|v| !v) {
            return Err(GapError::NotASingleCycle);
        }
        Ok(ObservationAssignment { targets })
    }

    /// Builds the assignment from a cycle given as a vertex sequence,
    /// e.g. `[0, 2, 1, 3]` means 0 -> 2 -> 1 -> 3 -> 0.
    pub fn from_cycle(order: &[usize]) -> Result<Self, GapError> {
        let n = order.len();
        let mut targets = vec![DroneId(0); n];
        for (k, &v) in order.iter().enumerate() {
            if v >= n {
                return Err(GapError::TargetOutOfRange { observer: DroneId(v), target: DroneId(v) });
            }
            targets[v] = DroneId(order[(k + 1) % n]);
        }
        Self::new(targets)
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn target_of(&self, observer: DroneId) -> DroneId {
        self.targets[observer.index()]
    }

    /// The drone that observes `target`.
    pub fn observer_of(&self, target: DroneId) -> DroneId {
        let idx = self
            .targets
            .iter()
            .position(|&t| t == target)
            .expect("single-cycle invariant: every drone is observed");
        DroneId(idx)
    }

    /// Drones adjacent to `id` in the observation graph, ignoring edge
    /// direction, in ascending id order without duplicates.
    pub fn neighbors_of(&self, id: DroneId) -> Vec<DroneId> {
        let mut out = vec![self.target_of(id), self.observer_of(id)];
        out.sort();
        out.dedup();
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (DroneId, DroneId)> + '_ {
        self.targets.iter().enumerate().map(|(i, &t)| (DroneId(i), t))
    }

    /// Target indices ordered by observer id; the deterministic tie-break
    /// key used by the planner.
    pub fn target_indices(&self) -> Vec<usize> {
        self.targets.iter().map(|t| t.index()).collect()
    }
}

/// Servo command produced for one camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraCommand {
    pub drone: DroneId,
    /// Servo angle in the body frame, already clamped to the servo range.
    pub angle: f64,
    /// False when the requested bearing fell outside the servo range and the
    /// angle was clamped to the nearest limit.
    pub reachable: bool,
}

/// Computes the servo angle pointing `observer`'s camera at a target.
///
/// The bearing is taken on the horizontal plane only, since the camera
/// rotates about the vertical axis and the swarm flies at similar altitudes.
pub fn camera_angle(
    observer: &DroneState,
    target_position_global: Vec3,
    servo_half_range: f64,
) -> Result<CameraCommand, GapError> {
    let dx = target_position_global.x - observer.position.x;
    let dy = target_position_global.y - observer.position.y;
    if dx == 0.0 && dy == 0.0 {
        return Err(GapError::DegenerateBearing);
    }
    let angle = wrap_angle(dy.atan2(dx) - observer.yaw);
    if angle.abs() <= servo_half_range {
        Ok(CameraCommand { drone: observer.id, angle, reachable: true })
    } else {
        Ok(CameraCommand {
            drone: observer.id,
            angle: servo_half_range.copysign(angle),
            reachable: false,
        })
    }
}
