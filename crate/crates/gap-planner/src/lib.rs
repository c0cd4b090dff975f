//! Graph-based attention planning (GAP).
//!
//! Each drone carries one camera on a one-DOF servo and can observe a single
//! neighbor at a time; every drone must be observed by someone. Under those
//! two pruning assumptions the feasible observation graphs collapse to the
//! `(N-1)!` single directed Hamiltonian cycles, and the planner picks the
//! cycle minimizing a weighted cost of squared observation distances minus
//! velocity/observation alignment. The chosen assignment then fixes the
//! servo rotation angle of every camera.

mod assignment;
mod cost;
mod incidence;
mod planner;

pub use assignment::{camera_angle, CameraCommand, ObservationAssignment};
pub use cost::{gap_cost, gap_cost_matrix, GapCost};
pub use incidence::{algebraic_connectivity, build_incidence, check_constraints, laplacian, IncidenceMatrix};
pub use planner::{count_candidates, plan};

use swarm_core::DroneId;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GapError {
    #[error("assignment needs at least 2 drones, got {0}")]
    TooFewDrones(usize),
    #[error("drone {observer} maps to out-of-range target {target}")]
    TargetOutOfRange { observer: DroneId, target: DroneId },
    #[error("drone {0} observes itself")]
    FixedPoint(DroneId),
    #[error("target map is not a single cycle over all drones")]
    NotASingleCycle,
    #[error("incidence entries must be -1, 0 or +1")]
    InvalidEntries,
    #[error("incidence row {0} must contain exactly one -1 and one +1")]
    MalformedRow(usize),
    #[error("observer and target coincide in the horizontal plane; bearing undefined")]
    DegenerateBearing,
    #[error("positions must be pairwise distinct")]
    CoincidentPositions,
    #[error("expected {expected} positions/velocities, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}
