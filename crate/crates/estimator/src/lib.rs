//! Distributed relative localization.
//!
//! Each drone estimates the relative position of every other drone in its
//! own local frame by fusing camera detections (its own and communicated
//! ones), Savitzky-Golay-filtered radio ranges, odometry displacements and a
//! first-order motion prior into one nonlinear least-squares solve per
//! frame, warm-started from the previous frame. A static pre-flight window
//! pins down the planar initial positions that anchor the odometry channel.

mod init;
mod localizer;
mod residual;
mod savgol;
mod solver;

pub use init::{initialize, initialize_pair, InitError, InitialEstimate, PairWindow};
pub use localizer::{
    build_residuals, Ablations, EstimateEntry, FrameInputs, RelativeEstimate, RelativeLocalizer,
};
pub use residual::{FusionProblem, ResidualBlock, ResidualKind};
pub use savgol::{causal_weights, centered_weights, sg_filter, CausalSg, SgError, SgMode};
pub use solver::{solve, LeastSquaresProblem, SolverReport};
