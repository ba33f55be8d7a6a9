//! Deterministic stand-in for the rover and its field.

pub mod mission;
pub mod rover;
pub mod scenario;
pub mod terrain;
pub mod world;

pub use mission::{Mission, MissionReport, Outcome, SafetyTimes, TraceRecord, VisionEntry};
pub use rover::RoverNode;
pub use scenario::{Scenario, ScenarioError, ScriptedCommand};
pub use terrain::{traversable, vertical_drop_limit_m, TerrainFeature, TerrainKind};
pub use world::{Beacon, CameraParams, NoiseModel, RoverPose, SensorEnvironment, SimWorld, VehicleParams};
