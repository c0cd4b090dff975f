//! Static initialization of relative positions.
//!
//! During a pre-flight window the swarm sits still with compasses aligned,
//! so each pair's relative position is a constant. Every collected
//! detection and range of the window constrains the same planar unknown;
//! only the horizontal axes are solved since the drones start on the ground.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use swarm_core::{DroneId, LmConfig, Vec3};
use thiserror::Error;

use crate::solver::{solve, LeastSquaresProblem, SolverReport};

#[derive(Debug, Error, PartialEq)]
pub enum InitError {
    #[error("pair ({owner}, {peer}) collected no vision detection: range-only data leaves a circle of candidate positions")]
    AmbiguousPair { owner: DroneId, peer: DroneId },
    #[error("pair ({owner}, {peer}) collected no range measurements")]
    NoRanging { owner: DroneId, peer: DroneId },
}

/// Measurements one drone collected about one peer over the window.
#[derive(Debug, Clone, Default)]
pub struct PairWindow {
    /// Own detections of the peer (p_ij).
    pub own_detections: Vec<Vec3>,
    /// The peer's communicated detections of us (p_ji).
    pub peer_detections: Vec<Vec3>,
    /// Raw range readings.
    pub ranges: Vec<f64>,
}

impl PairWindow {
    pub fn has_vision(&self) -> bool {
        !self.own_detections.is_empty() || !self.peer_detections.is_empty()
    }
}

/// Initial planar estimates of one drone (z fixed to 0).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InitialEstimate {
    pub owner: DroneId,
    pub estimates: std::collections::BTreeMap<DroneId, Vec3>,
}

struct InitPairProblem<'a> {
    window: &'a PairWindow,
}

impl InitPairProblem<'_> {
    fn residual_count(&self) -> usize {
        2 * self.window.own_detections.len()
            + 2 * self.window.peer_detections.len()
            + self.window.ranges.len()
    }
}

impl LeastSquaresProblem for InitPairProblem<'_> {
    fn residual_dim(&self) -> usize {
        self.residual_count()
    }

    fn param_dim(&self) -> usize {
        2
    }

    fn fill(&self, params: &DVector<f64>, residuals: &mut DVector<f64>, mut jacobian: Option<&mut DMatrix<f64>>) {
        if let Some(j) = jacobian.as_deref_mut() {
            j.fill(0.0);
        }
        let (x, y) = (params[0], params[1]);
        let mut row = 0;
        for p in &self.window.own_detections {
            residuals[row] = p.x - x;
            residuals[row + 1] = p.y - y;
            if let Some(j) = jacobian.as_deref_mut() {
                j[(row, 0)] = -1.0;
                j[(row + 1, 1)] = -1.0;
            }
            row += 2;
        }
        for p in &self.window.peer_detections {
            residuals[row] = p.x + x;
            residuals[row + 1] = p.y + y;
            if let Some(j) = jacobian.as_deref_mut() {
                j[(row, 0)] = 1.0;
                j[(row + 1, 1)] = 1.0;
            }
            row += 2;
        }
        for &d in &self.window.ranges {
            let norm = (x * x + y * y).sqrt();
            residuals[row] = norm - d;
            if let Some(j) = jacobian.as_deref_mut() {
                let inv = if norm > 0.0 { 1.0 / norm } else { 0.0 };
                j[(row, 0)] = x * inv;
                j[(row, 1)] = y * inv;
            }
            row += 1;
        }
    }

    fn regularize(&self, params: &mut DVector<f64>) {
        if !self.window.ranges.is_empty() && (params[0] * params[0] + params[1] * params[1]).sqrt() < 1e-9 {
            params[0] += 1e-6;
        }
    }
}

/// Solves one pair's planar initial position from its window.
pub fn initialize_pair(
    owner: DroneId,
    peer: DroneId,
    window: &PairWindow,
    lm: &LmConfig,
) -> Result<(Vec3, SolverReport), InitError> {
    if window.ranges.is_empty() {
        return Err(InitError::NoRanging { owner, peer });
    }
    if !window.has_vision() {
        return Err(InitError::AmbiguousPair { owner, peer });
    }

    // Initial guess: mean own detection when available, otherwise the
    // negated mean of the peer's detections.
    let guess = if !window.own_detections.is_empty() {
        mean(&window.own_detections)
    } else {
        -mean(&window.peer_detections)
    };

    let problem = InitPairProblem { window };
    let initial = DVector::from_vec(vec![guess.x, guess.y]);
    let (solution, report) = solve(&problem, initial, lm);
    Ok((Vec3::new(solution[0], solution[1], 0.0), report))
}

/// Initializes every pair of `owner` from the collected windows.
pub fn initialize(
    owner: DroneId,
    windows: &std::collections::BTreeMap<DroneId, PairWindow>,
    lm: &LmConfig,
) -> Result<InitialEstimate, InitError> {
    let mut estimates = std::collections::BTreeMap::new();
    for (&peer, window) in windows {
        let (estimate, _) = initialize_pair(owner, peer, window, lm)?;
        estimates.insert(peer, estimate);
    }
    Ok(InitialEstimate { owner, estimates })
}

fn mean(points: &[Vec3]) -> Vec3 {
    let mut sum = Vec3::ZERO;
    for &p in points {
        sum += p;
    }
    sum / points.len() as f64
}
