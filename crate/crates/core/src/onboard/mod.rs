//! Rover-side control: safety latches, autonomy, orientation, power and telemetry.

pub mod autonomy;
pub mod config;
pub mod controller;
pub mod drive;
pub mod orientation;
pub mod power;
pub mod telemetry;

pub use autonomy::{run_autonomy_step, AutonomyConfig, AutonomyState, AutonomyStatus, AutonomyTag, BeaconObservation};
pub use config::{ConfigError, ControllerConfig, LoadModel};
pub use controller::{Outbound, RoverController, TickInputs};
pub use drive::{ArmJoint, ArmState, DriveState, MAX_STEER_DEG};
pub use orientation::{compute_orientation, ComplementaryFilter, ImuSample, Orientation};
pub use power::{default_sections, power_step, BusReading, Pack, PowerSection, SectionId, SectionLoads};
pub use telemetry::{SensorReadings, TelemetrySnapshot};
