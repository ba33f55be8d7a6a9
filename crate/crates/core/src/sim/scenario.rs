//! Scenario files (TOML): field geometry, waypoints, noise, link budget and
//! an optional operator script.
//!
//! ```toml
//! name = "field-course"
//! duration_s = 600
//! waypoints = [{ lat = 23.7801, lon = 90.4070 }]
//!
//! [start]
//! lat = 23.78
//! lon = 90.407
//! heading_deg = 0
//!
//! [noise]
//! gps_error_radius_m = 3.0
//! compass_sigma_deg = 2.0
//!
//! [[terrain]]
//! kind = "obstacle"
//! lat = 23.7802
//! lon = 90.4072
//! extent_m = 1.0
//! angle_deg = 80
//! height_m = 0.5
//!
//! [[script]]
//! at_ms = 0
//! command = { type = "keys", keys = ["W"] }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basestation::bridge::OperatorCommand;
use crate::geodesy::{destination_point, EarthModel, GeoPoint, HeadingDeg};
use crate::protocol::link::LinkBudget;

use super::terrain::{TerrainError, TerrainFeature, TerrainKind};
use super::world::{Beacon, CameraParams, NoiseModel, SensorEnvironment, SimWorld, VehicleParams, WorldError};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("scenario syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("bad coordinate in {0}")]
    Coordinate(&'static str),
    #[error("terrain: {0}")]
    Terrain(#[from] TerrainError),
    #[error("world: {0}")]
    World(#[from] WorldError),
    #[error("link budget: {0}")]
    Link(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pose {
    pub lat: f64,
    pub lon: f64,
    #[serde(default)]
    pub heading_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSpec {
    pub full_strength_range_m: f64,
    pub dropout_range_m: f64,
    pub degraded_loss_rate: f64,
}

impl Default for LinkSpec {
    fn default() -> Self {
        let b = LinkBudget::default();
        Self {
            full_strength_range_m: b.full_strength_range_m(),
            dropout_range_m: b.dropout_range_m(),
            degraded_loss_rate: b.degraded_loss_rate(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerrainSpec {
    pub kind: TerrainKind,
    pub lat: f64,
    pub lon: f64,
    pub extent_m: f64,
    pub angle_deg: f64,
    pub height_m: f64,
}

/// Interval of simulated time with no GPS fix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outage {
    pub from_ms: u64,
    pub to_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedCommand {
    pub at_ms: u64,
    pub command: OperatorCommand,
}

fn default_duration() -> f64 {
    600.0
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_duration")]
    pub duration_s: f64,
    pub start: Pose,
    /// Defaults to the start position.
    #[serde(default)]
    pub base: Option<GeoPoint>,
    #[serde(default)]
    pub waypoints: Vec<GeoPoint>,
    /// Explicit beacons; by default one sits on every waypoint.
    #[serde(default)]
    pub beacons: Option<Vec<Beacon>>,
    #[serde(default)]
    pub vehicle: VehicleParams,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default)]
    pub link: LinkSpec,
    #[serde(default)]
    pub camera: CameraParams,
    #[serde(default)]
    pub environment: SensorEnvironment,
    #[serde(default)]
    pub terrain: Vec<TerrainSpec>,
    #[serde(default)]
    pub gps_outages: Vec<Outage>,
    #[serde(default)]
    pub arm_payload_kg: f64,
    /// Upload the waypoints and start autonomy at t = 0.
    #[serde(default = "yes")]
    pub autostart: bool,
    #[serde(default)]
    pub script: Vec<ScriptedCommand>,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenarios always serialize")
    }

    pub fn start_point(&self) -> Result<GeoPoint, ScenarioError> {
        GeoPoint::new(self.start.lat, self.start.lon).map_err(|_| ScenarioError::Coordinate("start"))
    }

    pub fn link_budget(&self) -> Result<LinkBudget, ScenarioError> {
        let l = self.link;
        LinkBudget::new(l.full_strength_range_m, l.dropout_range_m, l.degraded_loss_rate).map_err(|e| ScenarioError::Link(e.to_string()))
    }

    pub fn duration_ms(&self) -> u64 {
        (self.duration_s.max(0.0) * 1000.0) as u64
    }

    /// The operator script with the autostart commands, ordered by time.
    pub fn operator_script(&self) -> Vec<ScriptedCommand> {
        let mut script = Vec::new();
        if self.autostart && !self.waypoints.is_empty() {
            script.push(ScriptedCommand { at_ms: 0, command: OperatorCommand::SetWaypoints { points: self.waypoints.clone() } });
            script.push(ScriptedCommand { at_ms: 0, command: OperatorCommand::StartAutonomy });
        }
        script.extend(self.script.iter().cloned());
        // stable, so same-time commands keep file order
        script.sort_by_key(|c| c.at_ms);
        script
    }

    pub fn build_world(&self, seed: u64) -> Result<SimWorld, ScenarioError> {
        let start = self.start_point()?;
        let base = self.base.unwrap_or(start);
        let mut world = SimWorld::new(seed, start, HeadingDeg::new(self.start.heading_deg), base)
            .with_noise(self.noise)?
            .with_vehicle(self.vehicle)?
            .with_camera(self.camera)?;
        world.link = self.link_budget()?;
        world.environment = self.environment;
        world.beacons = match &self.beacons {
            Some(b) => b.clone(),
            None => self.waypoints.iter().enumerate().map(|(i, &pos)| Beacon { pos, waypoint_index: i }).collect(),
        };
        world.terrain = self
            .terrain
            .iter()
            .map(|t| {
                let at = GeoPoint::new(t.lat, t.lon).map_err(|_| ScenarioError::Coordinate("terrain"))?;
                Ok(TerrainFeature::new(t.kind, at, t.extent_m, t.angle_deg, t.height_m)?)
            })
            .collect::<Result<_, ScenarioError>>()?;
        Ok(world)
    }

    /// Six-waypoint course: three legs of about 10 m, a 20 m leg, then two
    /// shorter legs back toward the start, with turns between every leg.
    pub fn field_course(noise: NoiseModel) -> Self {
        let earth = EarthModel::default();
        let start = GeoPoint::new(23.7800, 90.4070).expect("valid");
        let legs = [(0.0, 10.0), (60.0, 10.0), (130.0, 10.0), (215.0, 20.0), (300.0, 15.0), (30.0, 10.0)];
        let mut at = start;
        let waypoints = legs
            .iter()
            .map(|&(bearing, dist)| {
                at = destination_point(at, HeadingDeg::new(bearing), dist, earth);
                at
            })
            .collect();
        Self {
            name: "field-course".into(),
            seed: 0,
            duration_s: 600.0,
            start: Pose { lat: start.lat(), lon: start.lon(), heading_deg: 0.0 },
            base: Some(destination_point(start, HeadingDeg::new(180.0), 5.0, earth)),
            waypoints,
            beacons: None,
            vehicle: VehicleParams::default(),
            noise,
            link: LinkSpec::default(),
            camera: CameraParams::default(),
            environment: SensorEnvironment::default(),
            terrain: Vec::new(),
            gps_outages: Vec::new(),
            arm_payload_kg: 0.0,
            autostart: true,
            script: Vec::new(),
        }
    }
}
