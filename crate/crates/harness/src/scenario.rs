//! Scenario files: one experiment description, TOML on disk.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use swarm_core::SwarmConfig;

use crate::HarnessError;

/// Camera attention policy during flight. Fixed mode runs the identical
/// pipeline with the servo frozen forward-facing, isolating the attention
/// variable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Active,
    Fixed,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Active => write!(f, "active"),
            Mode::Fixed => write!(f, "fixed"),
        }
    }
}

/// Fusion-channel ablations (applied to flight frames; the initialization
/// window always uses every channel).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    NoUwb,
    NoVision,
}

impl std::str::FromStr for Ablation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "no_uwb" => Ok(Ablation::NoUwb),
            "no_vision" => Ok(Ablation::NoVision),
            other => Err(format!("unknown ablation '{other}' (expected no_uwb or no_vision)")),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub ablations: BTreeSet<Ablation>,
    /// Target tangential speed of the circular formation.
    pub velocity_mps: f64,
    /// Flight duration after the initialization window.
    pub duration_s: f64,
    /// Seeds to run; empty means the swarm config's own seed.
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub swarm: SwarmConfig,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| HarnessError::Toml(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.swarm.validate()?;
        if self.name.is_empty() {
            return Err(HarnessError::Invalid("scenario name must not be empty".into()));
        }
        if !(self.velocity_mps > 0.0) {
            return Err(HarnessError::Invalid("velocity_mps must be positive".into()));
        }
        if !(self.duration_s > 0.0) {
            return Err(HarnessError::Invalid("duration_s must be positive".into()));
        }
        Ok(())
    }

    /// The seeds this scenario actually runs.
    pub fn effective_seeds(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            vec![self.swarm.seed]
        } else {
            self.seeds.clone()
        }
    }

    pub fn apply(&mut self, overrides: &ScenarioOverrides) {
        if let Some(mode) = overrides.mode {
            self.mode = mode;
        }
        if let Some(v) = overrides.velocity_mps {
            self.velocity_mps = v;
        }
        if let Some(seeds) = &overrides.seeds {
            self.seeds = seeds.clone();
        }
        if let Some(ablations) = &overrides.ablations {
            self.ablations = ablations.clone();
        }
    }
}

/// Command-line/API overrides applied on top of a scenario file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioOverrides {
    pub mode: Option<Mode>,
    pub velocity_mps: Option<f64>,
    pub seeds: Option<Vec<u64>>,
    pub ablations: Option<BTreeSet<Ablation>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scenario_parses_with_defaults() {
        let text = r#"
            name = "smoke"
            velocity_mps = 1.5
            duration_s = 10.0
        "#;
        let s = Scenario::from_toml(text).unwrap();
        assert_eq!(s.mode, Mode::Active);
        assert!(s.ablations.is_empty());
        assert_eq!(s.swarm.n_drones, 4);
        assert_eq!(s.effective_seeds(), vec![1]);
    }

    #[test]
    fn nested_swarm_settings_and_ablations_parse() {
        let text = r#"
            name = "ablated"
            mode = "fixed"
            ablations = ["no_uwb", "no_vision"]
            velocity_mps = 2.0
            duration_s = 30.0
            seeds = [7, 8]

            [swarm]
            n_drones = 5

            [swarm.camera]
            fov_deg = 120.0
        "#;
        let s = Scenario::from_toml(text).unwrap();
        assert_eq!(s.mode, Mode::Fixed);
        assert!(s.ablations.contains(&Ablation::NoUwb));
        assert_eq!(s.swarm.n_drones, 5);
        assert_eq!(s.swarm.camera.fov_deg, 120.0);
        assert_eq!(s.swarm.camera.max_range_m, 8.0);
    }

    #[test]
    fn invalid_configs_are_rejected_with_context() {
        let text = r#"
            name = "bad"
            velocity_mps = -1.0
            duration_s = 10.0
        "#;
        let err = Scenario::from_toml(text).unwrap_err();
        assert!(err.to_string().contains("velocity_mps"));

        let text = r#"
            name = "bad-rate"
            velocity_mps = 1.0
            duration_s = 10.0

            [swarm.uwb]
            rate_hz = 33.0
        "#;
        let err = Scenario::from_toml(text).unwrap_err();
        assert!(err.to_string().contains("uwb.rate_hz"));
    }

    #[test]
    fn unknown_keys_are_parse_errors() {
        let text = r#"
            name = "typo"
            velocty_mps = 1.0
            duration_s = 10.0
        "#;
        assert!(matches!(Scenario::from_toml(text), Err(HarnessError::Toml(_))));
    }

    #[test]
    fn overrides_replace_only_what_they_carry() {
        let mut s = Scenario::from_toml(
            r#"
            name = "base"
            velocity_mps = 1.0
            duration_s = 5.0
            seeds = [1, 2]
        "#,
        )
        .unwrap();
        s.apply(&ScenarioOverrides {
            mode: Some(Mode::Fixed),
            seeds: Some(vec![9]),
            ..Default::default()
        });
        assert_eq!(s.mode, Mode::Fixed);
        assert_eq!(s.velocity_mps, 1.0);
        assert_eq!(s.effective_seeds(), vec![9]);
    }
}
