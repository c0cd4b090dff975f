//! Measurement synthesis for the swarm simulator.
//!
//! Replaces the hardware stack with three geometric channels derived from
//! ground truth: marker detections from the servo-mounted camera, pairwise
//! radio ranges, and per-drone visual-inertial odometry. Everything a drone
//! learns about its peers travels through [`Bus`], a lossy broadcast with one
//! tick of latency.
//!
//! All synthesis functions are pure given an RNG stream; a zero-noise
//! configuration reproduces ground truth exactly.

mod bus;
mod camera;
mod types;
mod uwb;
mod vio;

pub use bus::Bus;
pub use camera::{simulate_camera, slew_toward, visible_target};
pub use types::{BusMessage, Payload, UwbRange, VioSample, VisionDetection};
pub use uwb::simulate_uwb;
pub use vio::VioChannel;
