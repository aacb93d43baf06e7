//! Scenario files: TOML with documented defaults and field-named validation.

use std::f64::consts::FRAC_PI_4;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formation::FormationSpec;
use crate::geometry::{Pose, Vec2};
use crate::model::Obstacle;
use crate::registration::AnnealSchedule;

/// The reference scenario shipped with the crate.
pub const REFERENCE_SCENARIO: &str = include_str!("../scenarios/reference.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum SimMode {
    /// Detect, reshape into a queue, pass the gap, register back into the V.
    #[default]
    #[serde(rename = "dfrpsr")]
    Dfrpsr,
    /// Every agent avoids obstacles on its own and returns to its slot.
    #[serde(rename = "baseline")]
    BaselineSenseAvoid,
}

impl SimMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SimMode::Dfrpsr => "dfrpsr",
            SimMode::BaselineSenseAvoid => "baseline",
        }
    }
}

impl std::str::FromStr for SimMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "dfrpsr" => Ok(SimMode::Dfrpsr),
            "baseline" => Ok(SimMode::BaselineSenseAvoid),
            other => Err(format!(
                "unknown mode `{other}` (expected dfrpsr or baseline)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FormationGeometry {
    pub spacing: f64,
    pub half_angle: f64,
}

impl Default for FormationGeometry {
    fn default() -> Self {
        FormationGeometry {
            spacing: 10.0,
            half_angle: FRAC_PI_4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleSpec {
    /// Convex, counterclockwise.
    pub vertices: Vec<Vec2>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseSpec {
    pub position: Vec2,
    #[serde(default)]
    pub heading: f64,
}

impl From<PoseSpec> for Pose {
    fn from(p: PoseSpec) -> Pose {
        Pose::new(p.position, p.heading)
    }
}

/// Every tunable of a run. Unset keys take the defaults listed on
/// [`ScenarioConfig::default`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_agents: usize,
    pub mode: SimMode,
    pub seed: u64,
    /// Leader ground speed, m/s.
    pub agent_speed: f64,
    /// Followers fly at `agent_speed * follower_speed_factor`; they need the
    /// surplus to catch up with slots after detours.
    pub follower_speed_factor: f64,
    pub dt: f64,
    pub max_time: f64,
    pub detection_range: f64,
    /// Narrowest gap passed in single file. Defaults to `2 * clearance + 1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub safe_dist: Option<f64>,
    pub queue_gap: f64,
    /// Distance to the queue slot at which an agent counts as queued.
    pub queue_tol: f64,
    /// Lateral offset used when avoiding an obstacle, and the distance an
    /// agent must keep from the gap obstacles to count as past them.
    pub clearance: f64,
    /// How far ahead an agent checks its path for obstacles.
    pub lookahead: f64,
    /// No step may end closer than this to an obstacle.
    pub obstacle_margin: f64,
    /// No follower step may end closer than this to another agent.
    /// Defaults to `0.6 * queue_gap`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_separation: Option<f64>,
    pub arrival_radius: f64,
    pub turnback_tol: f64,
    pub formation: FormationGeometry,
    pub anneal: AnnealSchedule,
    pub start_leader_pose: PoseSpec,
    pub destination: Vec2,
    pub obstacles: Vec<ObstacleSpec>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n_agents: 7,
            mode: SimMode::Dfrpsr,
            seed: 0,
            agent_speed: 2.0,
            follower_speed_factor: 1.25,
            dt: 0.1,
            max_time: 600.0,
            detection_range: 30.0,
            safe_dist: None,
            queue_gap: 5.0,
            queue_tol: 0.5,
            clearance: 3.0,
            lookahead: 15.0,
            obstacle_margin: 1.0,
            min_separation: None,
            arrival_radius: 2.0,
            turnback_tol: 0.5,
            formation: FormationGeometry::default(),
            anneal: AnnealSchedule::default(),
            start_leader_pose: PoseSpec {
                position: Vec2::ZERO,
                heading: 0.0,
            },
            destination: Vec2::new(250.0, 0.0),
            obstacles: Vec::new(),
        }
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(
            field,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

impl ScenarioConfig {
    pub fn safe_dist(&self) -> f64 {
        self.safe_dist.unwrap_or(2.0 * self.clearance + 1.0)
    }

    pub fn min_separation(&self) -> f64 {
        self.min_separation.unwrap_or(0.6 * self.queue_gap)
    }

    pub fn follower_speed(&self) -> f64 {
        self.agent_speed * self.follower_speed_factor
    }

    pub fn formation_spec(&self) -> FormationSpec {
        FormationSpec {
            n_agents: self.n_agents,
            spacing: self.formation.spacing,
            half_angle: self.formation.half_angle,
        }
    }

    pub fn start_pose(&self) -> Pose {
        self.start_leader_pose.into()
    }

    /// Obstacles with ids equal to their index in the file.
    pub fn build_obstacles(&self) -> Result<Vec<Obstacle>> {
        self.obstacles
            .iter()
            .enumerate()
            .map(|(i, o)| Obstacle::new(i as u32, o.vertices.clone()))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_agents < 1 {
            return Err(Error::config("n_agents", "must be at least 1"));
        }
        if !(self.dt > 0.0 && self.dt <= 1.0) {
            return Err(Error::config(
                "dt",
                format!("must lie in (0, 1], got {}", self.dt),
            ));
        }
        positive("agent_speed", self.agent_speed)?;
        if !(self.follower_speed_factor >= 1.0 && self.follower_speed_factor.is_finite()) {
            return Err(Error::config("follower_speed_factor", "must be at least 1"));
        }
        positive("max_time", self.max_time)?;
        positive("detection_range", self.detection_range)?;
        positive("safe_dist", self.safe_dist())?;
        positive("queue_gap", self.queue_gap)?;
        positive("queue_tol", self.queue_tol)?;
        positive("clearance", self.clearance)?;
        positive("lookahead", self.lookahead)?;
        positive("obstacle_margin", self.obstacle_margin)?;
        if !(self.min_separation() >= 0.0 && self.min_separation().is_finite()) {
            return Err(Error::config("min_separation", "must be non-negative"));
        }
        positive("arrival_radius", self.arrival_radius)?;
        positive("turnback_tol", self.turnback_tol)?;
        self.formation_spec().validate()?;
        self.anneal
            .validate()
            .map_err(|e| Error::config("anneal", e.to_string()))?;
        let start = self.start_pose();
        if !start.position.is_finite() || !self.start_leader_pose.heading.is_finite() {
            return Err(Error::config("start_leader_pose", "must be finite"));
        }
        if !self.destination.is_finite() {
            return Err(Error::config("destination", "must be finite"));
        }
        self.build_obstacles()?;
        Ok(())
    }

    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let config: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config serializes to TOML")
    }

    /// The reference scenario with the given mode.
    pub fn reference(mode: SimMode) -> Self {
        let mut c = ScenarioConfig::from_toml_str(REFERENCE_SCENARIO, Path::new("reference.toml"))
            .expect("bundled reference scenario is valid");
        c.mode = mode;
        c
    }
}

/// Reads, defaults and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ScenarioConfig::from_toml_str(&text, path)
}
