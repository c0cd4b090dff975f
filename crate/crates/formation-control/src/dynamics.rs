//! Double-integrator outer-loop dynamics.

use swarm_core::{Vec3, WorldState};

/// Advances the world one tick by semi-implicit Euler: velocities first,
/// then positions with the updated velocities. Yaw stays at zero
/// (compass-aligned swarm).
pub fn step_dynamics(world: &mut WorldState, controls: &[Vec3], dt: f64) {
    assert_eq!(controls.len(), world.len(), "one control input per drone");
    assert!(dt > 0.0);
    for (state, &u) in world.states.iter_mut().zip(controls) {
        state.velocity += u * dt;
        state.position += state.velocity * dt;
        state.yaw = 0.0;
    }
    world.tick += 1;
}

#[cfg(test)]
mod tests {
    use super::*;
    use swarm_core::{DroneId, DroneState};

    fn single(position: Vec3, velocity: Vec3) -> WorldState {
        let mut state = DroneState::at_rest(DroneId(0), position);
        state.velocity = velocity;
        WorldState::new(vec![state])
    }

    #[test]
    fn ballistic_step() {
        let mut world = single(Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0));
        step_dynamics(&mut world, &[Vec3::ZERO], 0.02);
        let s = world.state(DroneId(0));
        assert_eq!(s.velocity, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(s.position, Vec3::new(0.02, 0.0, 0.0));
        assert_eq!(world.tick, 1);
    }

    #[test]
    fn velocity_updates_before_position() {
        let mut world = single(Vec3::ZERO, Vec3::ZERO);
        step_dynamics(&mut world, &[Vec3::new(1.0, 0.0, 0.0)], 0.02);
        let s = world.state(DroneId(0));
        assert_eq!(s.velocity, Vec3::new(0.02, 0.0, 0.0));
        // Semi-implicit order: the fresh velocity moves the position.
        assert_eq!(s.position, Vec3::new(0.0004, 0.0, 0.0));
    }

    #[test]
    fn harmonic_oscillator_tracks_the_closed_form() {
        // u = -x is a unit oscillator; at dt = 1e-4 the semi-implicit
        // integrator follows x(t) = cos(t) closely and conserves the energy
        // envelope.
        let dt = 1e-4;
        let mut world = single(Vec3::new(1.0, 0.0, 0.0), Vec3::ZERO);
        let steps = (2.0 * std::f64::consts::PI / dt) as usize; // one period
        let mut max_energy_error: f64 = 0.0;
        for _ in 0..steps {
            let u = -world.state(DroneId(0)).position;
            step_dynamics(&mut world, &[u], dt);
            let s = world.state(DroneId(0));
            let energy = s.position.norm_squared() + s.velocity.norm_squared();
            max_energy_error = max_energy_error.max((energy - 1.0).abs());
        }
        let s = world.state(DroneId(0));
        let t = world.tick as f64 * dt;
        assert!((s.position.x - t.cos()).abs() < 1e-3, "x = {}", s.position.x);
        assert!(max_energy_error < 1e-3, "energy drift {max_energy_error}");
    }
}
