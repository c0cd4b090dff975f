//! The attention-planning cost.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use swarm_core::Vec3;

use crate::{GapError, IncidenceMatrix, ObservationAssignment};

/// Cost of one candidate observation graph.
///
/// `value = gamma1 * distance_term - gamma2 * velocity_term`. The distance
/// term sums squared observation distances; the velocity term sums the inner
/// products of each observer's velocity with its observation direction, so
/// observing along the flight direction lowers the cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapCost {
    pub value: f64,
    pub distance_term: f64,
    pub velocity_term: f64,
}

fn check_lengths(
    assignment: &ObservationAssignment,
    positions: &[Vec3],
    velocities: &[Vec3],
) -> Result<(), GapError> {
    let n = assignment.len();
    if positions.len() != n {
        return Err(GapError::LengthMismatch { expected: n, got: positions.len() });
    }
    if velocities.len() != n {
        return Err(GapError::LengthMismatch { expected: n, got: velocities.len() });
    }
    Ok(())
}

/// Evaluates the cost of an assignment by direct summation over observers.
pub fn gap_cost(
    assignment: &ObservationAssignment,
    positions: &[Vec3],
    velocities: &[Vec3],
    gamma1: f64,
    gamma2: f64,
) -> Result<GapCost, GapError> {
    check_lengths(assignment, positions, velocities)?;
    let mut distance_term = 0.0;
    let mut velocity_term = 0.0;
    for (observer, target) in assignment.iter() {
        let edge = positions[target.index()] - positions[observer.index()];
        distance_term += edge.norm_squared();
        velocity_term += velocities[observer.index()].dot(edge);
    }
    Ok(GapCost {
        value: gamma1 * distance_term - gamma2 * velocity_term,
        distance_term,
        velocity_term,
    })
}

/// Evaluates the same cost through the matrix expression
/// `gamma1 * tr((Dx)^T Dx) - gamma2 * tr(v^T Dx)` with states stacked as
/// N x 3 matrices. Independent algebraic route kept for cross-validation of
/// [`gap_cost`] and for scoring raw incidence candidates.
pub fn gap_cost_matrix(
    d: &IncidenceMatrix,
    positions: &[Vec3],
    velocities: &[Vec3],
    gamma1: f64,
    gamma2: f64,
) -> GapCost {
    let stack = |vs: &[Vec3]| {
        DMatrix::from_fn(vs.len(), 3, |r, c| match c {
            0 => vs[r].x,
            1 => vs[r].y,
            _ => vs[r].z,
        })
    };
    let x = stack(positions);
    let v = stack(velocities);
    let dx = d.entries() * x;
    let distance_term = (dx.transpose() * &dx).trace();
    let velocity_term = (v.transpose() * &dx).trace();
    GapCost {
        value: gamma1 * distance_term - gamma2 * velocity_term,
        distance_term,
        velocity_term,
    }
}
