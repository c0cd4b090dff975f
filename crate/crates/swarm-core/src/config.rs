//! Swarm-wide configuration.
//!
//! Every constant that is not pinned by the reference hardware lives here as
//! an editable default. All sensors, the estimator and the controller fire on
//! multiples of the base tick, so each configured rate must divide the tick
//! rate exactly; [`SwarmConfig::validate`] enforces that along with the
//! domain invariants.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vec3::Vec3;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
}

/// Where the attention planner takes its geometry from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanSource {
    /// Replan online from current positions and velocities.
    Current,
    /// Pre-plan from the desired formation reference.
    Reference,
}

/// Which relative estimates the formation term of the controller sums over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborMode {
    /// Only drones adjacent in the observation graph (both directions).
    Graph,
    /// Every other drone.
    All,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GapConfig {
    /// Weight of the summed squared observation distances.
    pub gamma1: f64,
    /// Weight of the velocity/observation-direction alignment term.
    pub gamma2: f64,
    /// Replanning period in seconds.
    pub period_s: f64,
    pub plan_source: PlanSource,
}

impl Default for GapConfig {
    fn default() -> Self {
        GapConfig { gamma1: 1.0, gamma2: 1.0, period_s: 0.5, plan_source: PlanSource::Current }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraConfig {
    pub rate_hz: f64,
    /// Horizontal field of view. The reference camera has a 150 degree view
    /// field.
    pub fov_deg: f64,
    pub max_range_m: f64,
    /// Probability that a target inside the view cone actually yields a
    /// detection (misdetection model; simulation default).
    pub detect_prob: f64,
    /// Detection noise floor sigma0 in sigma(d) = sigma0 + sigma1 * d
    /// (simulation default, no hardware ground truth).
    pub noise_floor_m: f64,
    /// Distance-proportional noise growth sigma1 (simulation default).
    pub noise_per_meter: f64,
    /// Half of the servo rotation range. The reference servo covers 300
    /// degrees in total.
    pub servo_half_range_deg: f64,
    /// Servo slew rate (simulation default; unspecified by the hardware).
    pub servo_slew_deg_s: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        CameraConfig {
            rate_hz: 20.0,
            fov_deg: 150.0,
            max_range_m: 8.0,
            detect_prob: 0.9,
            noise_floor_m: 0.02,
            noise_per_meter: 0.01,
            servo_half_range_deg: 150.0,
            servo_slew_deg_s: 300.0,
        }
    }
}

impl CameraConfig {
    pub fn fov_rad(&self) -> f64 {
        self.fov_deg.to_radians()
    }

    pub fn servo_half_range_rad(&self) -> f64 {
        self.servo_half_range_deg.to_radians()
    }

    pub fn servo_slew_rad_s(&self) -> f64 {
        self.servo_slew_deg_s.to_radians()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UwbConfig {
    /// The reference radio broadcasts at up to 25 Hz.
    pub rate_hz: f64,
    /// Range noise sigma (simulation default).
    pub noise_std_m: f64,
    /// Probability of an interference outlier per reading (simulation
    /// default).
    pub outlier_prob: f64,
    /// Outlier offset magnitude band, uniform in +-[min, max].
    pub outlier_min_m: f64,
    pub outlier_max_m: f64,
}

impl Default for UwbConfig {
    fn default() -> Self {
        UwbConfig {
            rate_hz: 25.0,
            noise_std_m: 0.1,
            outlier_prob: 0.02,
            outlier_min_m: 0.5,
            outlier_max_m: 2.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VioConfig {
    pub rate_hz: f64,
    /// Random-walk drift diffusion: accumulated drift std grows as
    /// `drift_per_meter * sqrt(meters traveled)` (simulation default).
    pub drift_per_meter: f64,
    /// White noise on each reported displacement (simulation default).
    pub white_noise_m: f64,
    /// White noise on each reported velocity (simulation default).
    pub velocity_noise_mps: f64,
}

impl Default for VioConfig {
    fn default() -> Self {
        VioConfig { rate_hz: 50.0, drift_per_meter: 0.02, white_noise_m: 0.005, velocity_noise_mps: 0.02 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommConfig {
    /// Independent per-(message, recipient) drop probability on the
    /// broadcast bus (simulation default).
    pub drop_prob: f64,
}

impl Default for CommConfig {
    fn default() -> Self {
        CommConfig { drop_prob: 0.1 }
    }
}

/// Weights applied to each residual kind in the fusion objective. All unit
/// by default.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResidualWeights {
    pub vision: f64,
    pub vision_reciprocal: f64,
    pub uwb: f64,
    pub vio: f64,
    pub motion_prior: f64,
}

impl Default for ResidualWeights {
    fn default() -> Self {
        ResidualWeights { vision: 1.0, vision_reciprocal: 1.0, uwb: 1.0, vio: 1.0, motion_prior: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LmConfig {
    pub max_iterations: usize,
    pub initial_damping: f64,
    /// Stop once the relative cost decrease of an accepted step drops below
    /// this.
    pub cost_tolerance: f64,
    /// Stop once the gradient infinity norm drops below this.
    pub gradient_tolerance: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig {
            max_iterations: 50,
            initial_damping: 1e-3,
            cost_tolerance: 1e-8,
            gradient_tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    /// Fusion frame rate, paced by the ranging radio.
    pub rate_hz: f64,
    /// Savitzky-Golay window applied to raw range history (odd).
    pub sg_window: usize,
    /// Savitzky-Golay polynomial order.
    pub sg_order: usize,
    /// Frames without data from a peer before its estimate is flagged stale.
    pub stale_limit_frames: u64,
    /// Alternative objective reading: minimize squared norms of scalar-norm
    /// residuals instead of vector residual blocks.
    pub scalar_norm_residuals: bool,
    pub weights: ResidualWeights,
    pub lm: LmConfig,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            rate_hz: 25.0,
            sg_window: 9,
            sg_order: 2,
            stale_limit_frames: 25,
            scalar_norm_residuals: false,
            weights: ResidualWeights::default(),
            lm: LmConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlConfig {
    pub rate_hz: f64,
    /// Position feedback gain.
    pub kp: f64,
    /// Velocity feedback gain.
    pub kd: f64,
    /// Formation-error consensus gain.
    pub c_formation: f64,
    /// Per-axis acceleration limit.
    pub u_max: f64,
    pub neighbor_mode: NeighborMode,
}

impl Default for ControlConfig {
    fn default() -> Self {
        ControlConfig {
            rate_hz: 50.0,
            kp: 4.0,
            kd: 3.0,
            c_formation: 1.0,
            u_max: 6.0,
            neighbor_mode: NeighborMode::Graph,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FormationConfig {
    /// Circle radius. The reference experiments fly a 1 m circle.
    pub radius_m: f64,
    /// Seconds to ramp linearly from standstill to the target speed.
    pub ramp_s: f64,
    pub center: Vec3,
    /// Radial offset applied to every start position (for perturbed-start
    /// experiments).
    pub start_perturbation_m: f64,
}

impl Default for FormationConfig {
    fn default() -> Self {
        FormationConfig { radius_m: 1.0, ramp_s: 3.0, center: Vec3::ZERO, start_perturbation_m: 0.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitConfig {
    /// Static data-collection window before flight.
    pub duration_s: f64,
}

impl Default for InitConfig {
    fn default() -> Self {
        InitConfig { duration_s: 5.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwarmConfig {
    pub n_drones: usize,
    /// Base tick length in seconds; every rate below must divide 1/dt.
    pub dt_s: f64,
    /// Default run seed; scenario seed lists override it per run.
    pub seed: u64,
    pub gap: GapConfig,
    pub camera: CameraConfig,
    pub uwb: UwbConfig,
    pub vio: VioConfig,
    pub comm: CommConfig,
    pub estimator: EstimatorConfig,
    pub control: ControlConfig,
    pub formation: FormationConfig,
    pub init: InitConfig,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        SwarmConfig {
            n_drones: 4,
            dt_s: 0.01,
            seed: 1,
            gap: GapConfig::default(),
            camera: CameraConfig::default(),
            uwb: UwbConfig::default(),
            vio: VioConfig::default(),
            comm: CommConfig::default(),
            estimator: EstimatorConfig::default(),
            control: ControlConfig::default(),
            formation: FormationConfig::default(),
            init: InitConfig::default(),
        }
    }
}

/// Number of ticks between firings of a subsystem running at `rate_hz`, or
/// `None` when the rate does not land on tick multiples.
pub fn period_ticks(rate_hz: f64, dt_s: f64) -> Option<u64> {
    if rate_hz <= 0.0 || dt_s <= 0.0 {
        return None;
    }
    let period = 1.0 / (rate_hz * dt_s);
    let rounded = period.round();
    if rounded >= 1.0 && (period - rounded).abs() < 1e-6 {
        Some(rounded as u64)
    } else {
        None
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errors = Vec::new();
        let mut check = |ok: bool, msg: &str| {
            if !ok {
                errors.push(msg.to_string());
            }
        };

        check(self.n_drones >= 2, "n_drones must be at least 2");
        check(self.dt_s > 0.0 && self.dt_s.is_finite(), "dt_s must be positive");
        check(self.gap.gamma1 > 0.0, "gap.gamma1 must be positive");
        check(self.gap.gamma2 >= 0.0, "gap.gamma2 must be non-negative");
        check(self.gap.period_s > 0.0, "gap.period_s must be positive");
        check(
            self.camera.fov_deg > 0.0 && self.camera.fov_deg < 360.0,
            "camera.fov_deg must be in (0, 360)",
        );
        check(self.camera.max_range_m > 0.0, "camera.max_range_m must be positive");
        check(
            (0.0..=1.0).contains(&self.camera.detect_prob),
            "camera.detect_prob must be in [0, 1]",
        );
        check(self.camera.noise_floor_m >= 0.0, "camera.noise_floor_m must be non-negative");
        check(self.camera.noise_per_meter >= 0.0, "camera.noise_per_meter must be non-negative");
        check(
            self.camera.servo_half_range_deg > 0.0 && self.camera.servo_half_range_deg <= 180.0,
            "camera.servo_half_range_deg must be in (0, 180]",
        );
        check(self.camera.servo_slew_deg_s > 0.0, "camera.servo_slew_deg_s must be positive");
        check(self.uwb.noise_std_m >= 0.0, "uwb.noise_std_m must be non-negative");
        check(
            (0.0..=1.0).contains(&self.uwb.outlier_prob),
            "uwb.outlier_prob must be in [0, 1]",
        );
        check(
            self.uwb.outlier_min_m >= 0.0 && self.uwb.outlier_max_m >= self.uwb.outlier_min_m,
            "uwb outlier band must satisfy 0 <= min <= max",
        );
        check(self.vio.drift_per_meter >= 0.0, "vio.drift_per_meter must be non-negative");
        check(self.vio.white_noise_m >= 0.0, "vio.white_noise_m must be non-negative");
        check(
            self.vio.velocity_noise_mps >= 0.0,
            "vio.velocity_noise_mps must be non-negative",
        );
        check(
            (0.0..=1.0).contains(&self.comm.drop_prob),
            "comm.drop_prob must be in [0, 1]",
        );
        check(self.estimator.sg_window % 2 == 1, "estimator.sg_window must be odd");
        check(
            self.estimator.sg_order < self.estimator.sg_window,
            "estimator.sg_order must be smaller than sg_window",
        );
        check(self.estimator.lm.max_iterations > 0, "estimator.lm.max_iterations must be positive");
        check(self.control.kp > 0.0, "control.kp must be positive");
        check(self.control.kd > 0.0, "control.kd must be positive");
        check(self.control.c_formation >= 0.0, "control.c_formation must be non-negative");
        check(self.control.u_max > 0.0, "control.u_max must be positive");
        check(self.formation.radius_m > 0.0, "formation.radius_m must be positive");
        check(self.formation.ramp_s >= 0.0, "formation.ramp_s must be non-negative");
        check(self.init.duration_s > 0.0, "init.duration_s must be positive");

        let w = &self.estimator.weights;
        check(
            w.vision > 0.0 && w.vision_reciprocal > 0.0 && w.uwb > 0.0 && w.vio > 0.0 && w.motion_prior > 0.0,
            "estimator.weights must all be positive",
        );

        for (name, rate) in [
            ("camera.rate_hz", self.camera.rate_hz),
            ("uwb.rate_hz", self.uwb.rate_hz),
            ("vio.rate_hz", self.vio.rate_hz),
            ("estimator.rate_hz", self.estimator.rate_hz),
            ("control.rate_hz", self.control.rate_hz),
        ] {
            if period_ticks(rate, self.dt_s).is_none() {
                errors.push(format!("{name} = {rate} does not land on tick multiples of dt_s = {}", self.dt_s));
            }
        }
        if self.dt_s > 0.0 && period_ticks(1.0 / self.gap.period_s, self.dt_s).is_none() {
            errors.push(format!(
                "gap.period_s = {} is not a multiple of dt_s = {}",
                self.gap.period_s, self.dt_s
            ));
        }

        if errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(errors))
        }
    }

    pub fn camera_period(&self) -> u64 {
        period_ticks(self.camera.rate_hz, self.dt_s).expect("validated")
    }

    pub fn uwb_period(&self) -> u64 {
        period_ticks(self.uwb.rate_hz, self.dt_s).expect("validated")
    }

    pub fn vio_period(&self) -> u64 {
        period_ticks(self.vio.rate_hz, self.dt_s).expect("validated")
    }

    pub fn estimator_period(&self) -> u64 {
        period_ticks(self.estimator.rate_hz, self.dt_s).expect("validated")
    }

    pub fn control_period(&self) -> u64 {
        period_ticks(self.control.rate_hz, self.dt_s).expect("validated")
    }

    pub fn planner_period(&self) -> u64 {
        period_ticks(1.0 / self.gap.period_s, self.dt_s).expect("validated")
    }

    pub fn init_ticks(&self) -> u64 {
        (self.init.duration_s / self.dt_s).round() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SwarmConfig::default().validate().unwrap();
    }

    #[test]
    fn default_periods_divide_the_tick_rate() {
        let cfg = SwarmConfig::default();
        assert_eq!(cfg.camera_period(), 5);
        assert_eq!(cfg.uwb_period(), 4);
        assert_eq!(cfg.vio_period(), 2);
        assert_eq!(cfg.estimator_period(), 4);
        assert_eq!(cfg.control_period(), 2);
        assert_eq!(cfg.planner_period(), 50);
    }

    #[test]
    fn misaligned_rate_is_rejected() {
        let mut cfg = SwarmConfig::default();
        cfg.camera.rate_hz = 33.0; // 100 Hz tick clock cannot host 33 Hz
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("camera.rate_hz"));
    }

    #[test]
    fn bad_weights_and_window_are_rejected() {
        let mut cfg = SwarmConfig::default();
        cfg.estimator.sg_window = 8;
        cfg.gap.gamma1 = 0.0;
        let err = cfg.validate().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("sg_window"));
        assert!(msg.contains("gamma1"));
    }

    #[test]
    fn round_trips_through_toml_shaped_json() {
        let cfg = SwarmConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: SwarmConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.n_drones, cfg.n_drones);
        assert_eq!(back.camera.fov_deg, cfg.camera.fov_deg);
    }
}
