//! Ground-control and onboard-control suite for a teleoperated planetary
//! rover, with a deterministic simulator standing in for the vehicle.

// `!(x > 0.0)` is how validation here rejects NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basestation;
pub mod geodesy;
pub mod nmea;
pub mod onboard;
pub mod protocol;
pub mod science;
pub mod sim;

pub use geodesy::{EarthModel, GeoPoint, HeadingDeg};
pub use nmea::{FixQuality, GpsFix};
pub use protocol::{Envelope, Message};
pub use onboard::{DriveState, TelemetrySnapshot};
pub use sim::{Mission, Scenario, SimWorld};
