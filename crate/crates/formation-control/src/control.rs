//! Consensus formation control law.

use serde::{Deserialize, Serialize};
use swarm_core::{DroneId, Vec3};

use crate::reference::ReferenceState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlGains {
    pub kp: f64,
    pub kd: f64,
    pub c_formation: f64,
    pub u_max: f64,
}

/// The drone's belief about its own global state (odometry displacement plus
/// its configured start position; ground truth never enters the controller).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OwnStateEstimate {
    pub position: Vec3,
    pub velocity: Vec3,
}

/// One observation-graph neighbor as seen by the controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborEstimate {
    pub target: DroneId,
    /// Estimated relative position of the neighbor in the drone's frame.
    pub relative_position: Vec3,
    pub stale: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlInput {
    pub drone: DroneId,
    pub u: Vec3,
    /// True when no fresh neighbor estimate was available and the law fell
    /// back to pure feedforward + PD.
    pub pd_only: bool,
}

/// Feedforward + PD + formation-error consensus:
///
/// `u_i = a*_i + kp (x*_i - x_i) + kd (v*_i - v_i)
///        + c * sum_j [ x_ij - (x*_j - x*_i) ]`
///
/// The sum runs over the supplied neighbors (the harness selects them from
/// the observation graph, both edge directions); stale estimates are
/// excluded. The result is clamped per axis to `u_max`.
pub fn control_law(
    drone: DroneId,
    reference: &ReferenceState,
    own: &OwnStateEstimate,
    neighbors: &[NeighborEstimate],
    gains: &ControlGains,
) -> ControlInput {
    let i = drone.index();
    let mut u = reference.accelerations[i]
        + (reference.positions[i] - own.position) * gains.kp
        + (reference.velocities[i] - own.velocity) * gains.kd;

    let mut fresh = 0usize;
    let mut formation_error = Vec3::ZERO;
    for n in neighbors {
        if n.stale {
            continue;
        }
        fresh += 1;
        let desired_offset = reference.positions[n.target.index()] - reference.positions[i];
        formation_error += n.relative_position - desired_offset;
    }
    u += formation_error * gains.c_formation;

    ControlInput { drone, u: u.clamp_abs(gains.u_max), pd_only: fresh == 0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::CircularFormation;

    fn gains() -> ControlGains {
        ControlGains { kp: 4.0, kd: 3.0, c_formation: 1.0, u_max: 6.0 }
    }

    fn reference_at(t: f64) -> ReferenceState {
        CircularFormation { n_drones: 4, radius: 1.0, speed: 1.5, ramp_s: 3.0, center: Vec3::ZERO }
            .reference(t)
    }

    fn neighbors_on_reference(r: &ReferenceState, i: usize) -> Vec<NeighborEstimate> {
        let prev = (i + 3) % 4;
        let next = (i + 1) % 4;
        [prev, next]
            .into_iter()
            .map(|j| NeighborEstimate {
                target: DroneId(j),
                relative_position: r.positions[j] - r.positions[i],
                stale: false,
            })
            .collect()
    }

    #[test]
    fn zero_error_yields_pure_feedforward() {
        let r = reference_at(5.0);
        for i in 0..4 {
            let own = OwnStateEstimate { position: r.positions[i], velocity: r.velocities[i] };
            let out = control_law(DroneId(i), &r, &own, &neighbors_on_reference(&r, i), &gains());
            assert!((out.u - r.accelerations[i]).norm() < 1e-12);
            assert!(!out.pd_only);
        }
    }

    #[test]
    fn pd_arithmetic_on_a_pure_position_offset() {
        let r = reference_at(4.0);
        let own = OwnStateEstimate {
            position: r.positions[0] + Vec3::new(0.1, 0.0, 0.0),
            velocity: r.velocities[0],
        };
        let out = control_law(DroneId(0), &r, &own, &[], &gains());
        let expected_x = r.accelerations[0].x - 0.4;
        assert!((out.u.x - expected_x).abs() < 1e-12);
        assert!(out.pd_only);
    }

    #[test]
    fn biased_neighbor_estimate_shifts_only_that_drone() {
        let r = reference_at(6.0);
        let bias = Vec3::new(0.1, 0.0, 0.0);
        for i in 0..4 {
            let own = OwnStateEstimate { position: r.positions[i], velocity: r.velocities[i] };
            let mut neighbors = neighbors_on_reference(&r, i);
            if i == 2 {
                neighbors[0].relative_position += bias;
            }
            let out = control_law(DroneId(i), &r, &own, &neighbors, &gains());
            let formation_term = out.u - r.accelerations[i];
            if i == 2 {
                assert!((formation_term - bias).norm() < 1e-12);
            } else {
                assert!(formation_term.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn translation_of_the_whole_problem_leaves_u_unchanged() {
        let shift = Vec3::new(12.0, -7.0, 3.0);
        let r = reference_at(2.0);
        let mut shifted = r.clone();
        for p in &mut shifted.positions {
            *p += shift;
        }
        let own = OwnStateEstimate {
            position: r.positions[1] + Vec3::new(0.05, -0.02, 0.0),
            velocity: r.velocities[1] + Vec3::new(0.1, 0.0, 0.0),
        };
        let own_shifted =
            OwnStateEstimate { position: own.position + shift, velocity: own.velocity };
        let neighbors = neighbors_on_reference(&r, 1);
        let a = control_law(DroneId(1), &r, &own, &neighbors, &gains());
        let b = control_law(DroneId(1), &shifted, &own_shifted, &neighbors, &gains());
        assert!((a.u - b.u).norm() < 1e-12);
    }

    #[test]
    fn stale_neighbors_are_excluded_and_flagged() {
        let r = reference_at(3.0);
        let own = OwnStateEstimate { position: r.positions[0], velocity: r.velocities[0] };
        let mut neighbors = neighbors_on_reference(&r, 0);
        neighbors[0].relative_position += Vec3::new(5.0, 0.0, 0.0);
        neighbors[0].stale = true;
        let out = control_law(DroneId(0), &r, &own, &neighbors, &gains());
        assert!((out.u - r.accelerations[0]).norm() < 1e-12);
        assert!(!out.pd_only);

        for n in &mut neighbors {
            n.stale = true;
        }
        let out = control_law(DroneId(0), &r, &own, &neighbors, &gains());
        assert!(out.pd_only);
    }

    #[test]
    fn control_is_clamped_per_axis() {
        let r = reference_at(0.0);
        let own = OwnStateEstimate {
            position: r.positions[0] + Vec3::new(10.0, -10.0, 0.0),
            velocity: r.velocities[0],
        };
        let out = control_law(DroneId(0), &r, &own, &[], &gains());
        assert_eq!(out.u.x, -6.0);
        assert_eq!(out.u.y, 6.0);
        assert!(out.u.norm_inf() <= 6.0);
    }
}
