//! Residual blocks of the per-frame fusion objective.
//!
//! For drone `i` estimating `x = x_ij` (the relative position of drone `j`
//! in `i`'s local frame), a frame contributes up to five block kinds:
//!
//! * vision: `r = p_ij - x` (own detection)
//! * vision reciprocal: `r = p_ji + x` (communicated detection, aligned frames)
//! * uwb: `r = |x| - d` (filtered range)
//! * vio: `r = (x0 + dj - di) - x` (odometry displacements since initialization)
//! * motion prior: `r = x_prev + (vj - vi) dt - x`
//!
//! A block exists only when its measurement exists at the frame; missing
//! channels simply omit blocks. Each block is weighted by the square root of
//! its configured weight so the solved objective is the weighted sum of
//! squared residuals.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use swarm_core::{DroneId, Vec3};

/// Parameter vector layout helper: pair `p` owns the three unknowns starting
/// at `3 * p`.
fn read_vec3(params: &DVector<f64>, pair: usize) -> Vec3 {
    Vec3::new(params[3 * pair], params[3 * pair + 1], params[3 * pair + 2])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualKind {
    Vision,
    VisionReciprocal,
    Uwb,
    Vio,
    MotionPrior,
}

/// One term of the fusion objective, tied to the pair unknown `target`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualBlock {
    pub target: DroneId,
    pub kind: ResidualKind,
    pub weight: f64,
    /// Measurement constant: the vector `c` of `r = c - x` / `r = c + x`
    /// kinds, or `(d, _, _)` for the range kind.
    constant: Vec3,
}

impl ResidualBlock {
    pub fn vision(target: DroneId, detection: Vec3, weight: f64) -> Self {
        ResidualBlock { target, kind: ResidualKind::Vision, weight, constant: detection }
    }

    pub fn vision_reciprocal(target: DroneId, detection: Vec3, weight: f64) -> Self {
        ResidualBlock { target, kind: ResidualKind::VisionReciprocal, weight, constant: detection }
    }

    pub fn uwb(target: DroneId, distance: f64, weight: f64) -> Self {
        ResidualBlock { target, kind: ResidualKind::Uwb, weight, constant: Vec3::new(distance, 0.0, 0.0) }
    }

    pub fn vio(target: DroneId, deduced: Vec3, weight: f64) -> Self {
        ResidualBlock { target, kind: ResidualKind::Vio, weight, constant: deduced }
    }

    pub fn motion_prior(target: DroneId, predicted: Vec3, weight: f64) -> Self {
        ResidualBlock { target, kind: ResidualKind::MotionPrior, weight, constant: predicted }
    }

    /// Residual dimension: 3 for vector kinds, 1 for the range kind (and for
    /// everything in scalar-norm mode).
    pub fn dim(&self, scalar_norm: bool) -> usize {
        match self.kind {
            ResidualKind::Uwb => 1,
            _ if scalar_norm => 1,
            _ => 3,
        }
    }

    /// Sign of `x` inside the vector residual: `r = c + sign * x`.
    fn x_sign(&self) -> f64 {
        match self.kind {
            ResidualKind::VisionReciprocal => 1.0,
            _ => -1.0,
        }
    }

    /// Writes the (weighted) residual rows and, when requested, the Jacobian
    /// rows with respect to this block's pair unknowns.
    pub fn fill(
        &self,
        x: Vec3,
        scalar_norm: bool,
        row: usize,
        pair: usize,
        residuals: &mut DVector<f64>,
        mut jacobian: Option<&mut DMatrix<f64>>,
    ) {
        let sw = self.weight.sqrt();
        let col = 3 * pair;
        match self.kind {
            ResidualKind::Uwb => {
                let norm = x.norm();
                residuals[row] = sw * (norm - self.constant.x);
                if let Some(j) = jacobian.as_deref_mut() {
                    // d|x|/dx = x^T / |x|; the solver's regularize hook keeps
                    // the iterate away from the origin.
                    let inv = if norm > 0.0 { 1.0 / norm } else { 0.0 };
                    j[(row, col)] = sw * x.x * inv;
                    j[(row, col + 1)] = sw * x.y * inv;
                    j[(row, col + 2)] = sw * x.z * inv;
                }
            }
            _ if scalar_norm => {
                // r = |c + sign*x|: the alternative unsquared-norm reading
                // of the objective, kept behind a config flag for
                // comparison.
                let s = self.x_sign();
                let v = self.constant + x * s;
                let norm = v.norm();
                residuals[row] = sw * norm;
                if let Some(j) = jacobian.as_deref_mut() {
                    let inv = if norm > 0.0 { s / norm } else { 0.0 };
                    j[(row, col)] = sw * v.x * inv;
                    j[(row, col + 1)] = sw * v.y * inv;
                    j[(row, col + 2)] = sw * v.z * inv;
                }
            }
            _ => {
                let s = self.x_sign();
                let v = self.constant + x * s;
                residuals[row] = sw * v.x;
                residuals[row + 1] = sw * v.y;
                residuals[row + 2] = sw * v.z;
                if let Some(j) = jacobian.as_deref_mut() {
                    for axis in 0..3 {
                        j[(row + axis, col + axis)] = sw * s;
                    }
                }
            }
        }
    }
}

/// Joint fusion problem over all pairs that received data this frame.
///
/// The parameter vector stacks the pair unknowns in ascending target-id
/// order; each block touches only its own pair's three unknowns.
pub struct FusionProblem {
    pairs: Vec<DroneId>,
    blocks: Vec<(usize, ResidualBlock)>,
    scalar_norm: bool,
    residual_dim: usize,
}

impl FusionProblem {
    /// Builds the problem from per-frame blocks. Pairs appear in ascending
    /// id order; blocks keep their build order within the stacked residual.
    pub fn new(blocks: Vec<ResidualBlock>, scalar_norm: bool) -> Self {
        let mut pairs: Vec<DroneId> = blocks.iter().map(|b| b.target).collect();
        pairs.sort();
        pairs.dedup();
        let indexed: Vec<(usize, ResidualBlock)> = blocks
            .into_iter()
            .map(|b| (pairs.binary_search(&b.target).expect("pair present"), b))
            .collect();
        let residual_dim = indexed.iter().map(|(_, b)| b.dim(scalar_norm)).sum();
        FusionProblem { pairs, blocks: indexed, scalar_norm, residual_dim }
    }

    pub fn pairs(&self) -> &[DroneId] {
        &self.pairs
    }

    pub fn pack(&self, estimate_of: impl Fn(DroneId) -> Vec3) -> DVector<f64> {
        let mut params = DVector::zeros(3 * self.pairs.len());
        for (p, &id) in self.pairs.iter().enumerate() {
            let v = estimate_of(id);
            params[3 * p] = v.x;
            params[3 * p + 1] = v.y;
            params[3 * p + 2] = v.z;
        }
        params
    }

    pub fn unpack(&self, params: &DVector<f64>) -> Vec<(DroneId, Vec3)> {
        self.pairs.iter().enumerate().map(|(p, &id)| (id, read_vec3(params, p))).collect()
    }

    fn pair_has_range_block(&self, pair: usize) -> bool {
        self.blocks.iter().any(|(p, b)| *p == pair && b.kind == ResidualKind::Uwb)
    }
}

impl crate::solver::LeastSquaresProblem for FusionProblem {
    fn residual_dim(&self) -> usize {
        self.residual_dim
    }

    fn param_dim(&self) -> usize {
        3 * self.pairs.len()
    }

    fn fill(&self, params: &DVector<f64>, residuals: &mut DVector<f64>, mut jacobian: Option<&mut DMatrix<f64>>) {
        if let Some(j) = jacobian.as_deref_mut() {
            j.fill(0.0);
        }
        let mut row = 0;
        for (pair, block) in &self.blocks {
            let x = read_vec3(params, *pair);
            block.fill(x, self.scalar_norm, row, *pair, residuals, jacobian.as_deref_mut());
            row += block.dim(self.scalar_norm);
        }
    }

    fn regularize(&self, params: &mut DVector<f64>) {
        // The range Jacobian x^T/|x| is singular at the origin; nudge the
        // iterate in a fixed direction.
        for pair in 0..self.pairs.len() {
            if self.pair_has_range_block(pair) && read_vec3(params, pair).norm() < 1e-9 {
                params[3 * pair] += 1e-6;
            }
        }
    }
}
