//! Exhaustive search over the pruned assignment space.

use itertools::Itertools;
use swarm_core::{DroneId, Vec3};

use crate::{GapError, ObservationAssignment};

/// Size of the assignment search space for `n` drones: `(n-1)!` single
/// cycles after pruning, `(n-1)^n` one-target-per-drone maps before.
pub fn count_candidates(n: usize, pruned: bool) -> u128 {
    assert!(n >= 2, "need at least 2 drones");
    if pruned {
        (2..n as u128).product()
    } else {
        (n as u128 - 1).pow(n as u32)
    }
}

/// Picks the feasible observation cycle with minimal cost.
///
/// Fixing drone 0 at the head of the vertex sequence and permuting the rest
/// enumerates every single directed N-cycle exactly once, i.e. all `(n-1)!`
/// candidates left by the pruning assumptions. Cost ties are broken by the
/// lexicographically smallest target map so the result is deterministic.
pub fn plan(
    positions: &[Vec3],
    velocities: &[Vec3],
    gamma1: f64,
    gamma2: f64,
) -> Result<ObservationAssignment, GapError> {
    let n = positions.len();
    if n < 2 {
        return Err(GapError::TooFewDrones(n));
    }
    if velocities.len() != n {
        return Err(GapError::LengthMismatch { expected: n, got: velocities.len() });
    }
    for i in 0..n {
        for j in i + 1..n {
            if positions[i] == positions[j] {
                return Err(GapError::CoincidentPositions);
            }
        }
    }

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut targets = vec![0usize; n];
    let mut edges = vec![(0usize, 0usize); n];
    for rest in (1..n).permutations(n - 1) {
        // Vertex sequence 0, rest[0], ..., rest[n-2], back to 0.
        let mut prev = 0usize;
        for &v in &rest {
            targets[prev] = v;
            prev = v;
        }
        targets[prev] = 0;

        // Sum the distance term over the undirected edge set in canonical
        // order, so that a cycle and its reverse (same edges, zero velocity
        // term) produce bit-identical costs and the lexicographic tie-break
        // stays meaningful.
        for (i, &t) in targets.iter().enumerate() {
            edges[i] = if i < t { (i, t) } else { (t, i) };
        }
        edges.sort_unstable();
        let mut distance = 0.0;
        for &(a, b) in &edges {
            distance += (positions[b] - positions[a]).norm_squared();
        }
        let mut alignment = 0.0;
        for (i, &t) in targets.iter().enumerate() {
            alignment += velocities[i].dot(positions[t] - positions[i]);
        }
        let value = gamma1 * distance - gamma2 * alignment;

        let better = match &best {
            None => true,
            Some((best_value, best_targets)) => {
                value < *best_value || (value == *best_value && targets < *best_targets)
            }
        };
        if better {
            best = Some((value, targets.clone()));
        }
    }

    let (_, targets) = best.expect("n >= 2 always yields at least one cycle");
    ObservationAssignment::new(targets.into_iter().map(DroneId).collect())
}
