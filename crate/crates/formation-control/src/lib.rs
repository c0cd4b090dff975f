//! Swarm dynamics and formation control.
//!
//! The outer loop of each drone is a double integrator driven by a
//! feedforward-plus-feedback law: reference acceleration, a PD term on the
//! drone's own tracking error, and a consensus term over observation-graph
//! neighbors that corrects formation error using the relative-localization
//! estimates.

mod control;
mod dynamics;
mod reference;

pub use control::{control_law, ControlGains, ControlInput, NeighborEstimate, OwnStateEstimate};
pub use dynamics::step_dynamics;
pub use reference::{circular_reference, CircularFormation, ReferenceState};
