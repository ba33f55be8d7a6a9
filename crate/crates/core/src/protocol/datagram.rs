//! Connectionless telemetry: one frame per datagram, newest wins.

use super::codec::{decode, encode, CodecError};
use super::message::{Envelope, Message};
use crate::onboard::telemetry::TelemetrySnapshot;

/// Stamps outgoing snapshots with an increasing datagram id.
#[derive(Debug, Default)]
pub struct TelemetrySender {
    next_id: u64,
}

impl TelemetrySender {
    pub fn new() -> Self {
        Self { next_id: 1 }
    }

    pub fn datagram(&mut self, snapshot: &TelemetrySnapshot) -> Result<Vec<u8>, CodecError> {
        let id = self.next_id.max(1);
        let frame = encode(&Envelope::new(id, Message::Telemetry { snapshot: Box::new(snapshot.clone()) }))?;
        self.next_id = id + 1;
        Ok(frame)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Intake {
    /// Newer than anything seen before.
    Fresh(Box<TelemetrySnapshot>),
    /// Arrived after a newer datagram; ignored.
    Stale,
    /// Undecodable or not telemetry; ignored.
    Rejected,
}

/// Keeps only the most recent snapshot. Lost datagrams are simply skipped.
#[derive(Debug, Default)]
pub struct TelemetryReceiver {
    last_id: Option<u64>,
    latest: Option<TelemetrySnapshot>,
    accepted: u64,
    skipped: u64,
}

impl TelemetryReceiver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn ingest(&mut self, datagram: &[u8]) -> Intake {
        let Ok((envelope, rest)) = decode(datagram) else {
            return Intake::Rejected;
        };
        let Message::Telemetry { snapshot } = envelope.message else {
            return Intake::Rejected;
        };
        if !rest.is_empty() {
            return Intake::Rejected;
        }
        if self.last_id.is_some_and(|last| envelope.id <= last) {
            self.skipped += 1;
            return Intake::Stale;
        }
        self.last_id = Some(envelope.id);
        self.accepted += 1;
        self.latest = Some((*snapshot).clone());
        Intake::Fresh(snapshot)
    }

    pub fn latest(&self) -> Option<&TelemetrySnapshot> {
        self.latest.as_ref()
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    /// Forget the id high-water mark, e.g. after the rover restarted.
    pub fn reset(&mut self) {
        self.last_id = None;
    }
}
