//! Shared domain types for the active-vision swarm simulator.
//!
//! Everything here is a plain value object: identifiers, 3-D vectors, the
//! tick clock, per-drone state and the swarm-wide configuration. All
//! randomness in the workspace flows through [`rng::seeded_stream`] so that
//! whole runs replay bit-identically from a single seed.
//!
//! Frame conventions: the global frame is East-North-Up with yaw measured
//! counterclockwise from +X. Drone local frames are yaw-aligned with the
//! global frame (compass-aligned swarm), so local and global coordinates
//! differ only by a translation.

pub mod angles;
pub mod config;
pub mod rng;
pub mod state;
pub mod vec3;

pub use angles::wrap_angle;
pub use config::{
    CameraConfig, CommConfig, ConfigError, ControlConfig, EstimatorConfig, FormationConfig,
    GapConfig, InitConfig, LmConfig, NeighborMode, PlanSource, ResidualWeights, SwarmConfig,
    UwbConfig, VioConfig,
};
pub use rng::{seeded_stream, StreamRng};
pub use state::{DroneId, DroneState, Timestamp, WorldState};
pub use vec3::Vec3;
