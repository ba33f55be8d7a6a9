use serde::{Deserialize, Serialize};

use crate::geodesy::GeoPoint;
use crate::onboard::drive::ArmJoint;
use crate::onboard::telemetry::TelemetrySnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ScienceAction {
    Drill,
    ReadSensors,
    RunBiomass,
    RunCapillary,
}

/// Everything that crosses the base-station/rover link.
///
/// Serialized as a JSON object with a `"type"` discriminator and
/// lowerCamelCase keys, e.g. `{"type":"drive","throttle":1.0,"steerDeg":0.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Message {
    /// Throttle in [-1, 1]; the steering angle is a request, clamped onboard.
    Drive { throttle: f64, steer_deg: f64 },
    ArmJoint { joint: ArmJoint, rate: f64 },
    #[serde(rename = "estop")]
    EStop,
    #[serde(rename = "clearEstop")]
    ClearEStop,
    SetWaypoints { points: Vec<GeoPoint> },
    StartAutonomy,
    AbortAutonomy,
    ScienceCommand { action: ScienceAction },
    Ack { seq: u64, accepted: bool },
    Telemetry { snapshot: Box<TelemetrySnapshot> },
    Heartbeat { seq: u64 },
}

impl Message {
    /// Operator commands that are sequenced, acked and subject to stale-drop.
    pub fn is_control(&self) -> bool {
        !matches!(self, Self::Ack { .. } | Self::Telemetry { .. } | Self::Heartbeat { .. })
    }

    /// Commands that move an actuator and are refused while e-stopped.
    pub fn is_motion(&self) -> bool {
        matches!(
            self,
            Self::Drive { .. }
                | Self::ArmJoint { .. }
                | Self::StartAutonomy
                | Self::ScienceCommand { action: ScienceAction::Drill }
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Drive { .. } => "drive",
            Self::ArmJoint { .. } => "armJoint",
            Self::EStop => "estop",
            Self::ClearEStop => "clearEstop",
            Self::SetWaypoints { .. } => "setWaypoints",
            Self::StartAutonomy => "startAutonomy",
            Self::AbortAutonomy => "abortAutonomy",
            Self::ScienceCommand { .. } => "scienceCommand",
            Self::Ack { .. } => "ack",
            Self::Telemetry { .. } => "telemetry",
            Self::Heartbeat { .. } => "heartbeat",
        }
    }

    /// Checks the numeric ranges the codec guarantees on the wire.
    pub fn validate(&self) -> Result<(), &'static str> {
        let unit = |x: f64| x.is_finite() && (-1.0..=1.0).contains(&x);
        match self {
            Self::Drive { throttle, steer_deg } => {
                if !unit(*throttle) {
                    return Err("drive throttle outside [-1, 1]");
                }
                if !steer_deg.is_finite() {
                    return Err("drive steering is not finite");
                }
            }
            Self::ArmJoint { rate, .. } if !unit(*rate) => return Err("arm rate outside [-1, 1]"),
            _ => {}
        }
        Ok(())
    }
}

/// A message plus the sender's per-session sequence number (`"id"` on the wire).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub id: u64,
    #[serde(flatten)]
    pub message: Message,
}

impl Envelope {
    pub fn new(id: u64, message: Message) -> Self {
        Self { id, message }
    }
}
