//! Operator-side state hub.
//!
//! The bridge owns the control session, so keyboard input, console clicks and
//! scripted commands all pass through [`Bridge::submit`] and get their
//! sequence numbers from the one session. It keeps the newest telemetry,
//! connection status and mission log, and queues JSON events for consoles.
//! Like the session it does no I/O; the caller moves bytes and supplies time.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geodesy::GeoPoint;
use crate::onboard::drive::ArmJoint;
use crate::onboard::telemetry::TelemetrySnapshot;
use crate::protocol::datagram::{Intake, TelemetryReceiver};
use crate::protocol::message::{Message, ScienceAction};
use crate::protocol::session::{ControlSession, Liveness, SessionError};

use super::keys::{drive_command_from_keys, Key, KeySet};
use super::log::{LogEvent, LogRecord, MissionLog};

pub const DRIVE_PERIOD_MS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ConnectionStatus {
    Connected,
    Disconnected,
}

/// A command from any operator surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum OperatorCommand {
    /// The full set of drive keys currently held.
    Keys { keys: Vec<Key> },
    #[serde(rename = "estop")]
    EStop,
    #[serde(rename = "clearEstop")]
    ClearEStop,
    SetWaypoints { points: Vec<GeoPoint> },
    AppendWaypoint { point: GeoPoint },
    StartAutonomy,
    AbortAutonomy,
    Arm { joint: ArmJoint, rate: f64 },
    Science { action: ScienceAction },
}

/// Events pushed to console clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum ConsoleEvent {
    Telemetry { snapshot: Box<TelemetrySnapshot> },
    Status { status: ConnectionStatus, reason: Option<String> },
    Sent { seq: u64, command: String },
    Ack { seq: u64, accepted: bool, command: Option<String> },
    LogTail { records: Vec<LogRecord> },
    Rejected { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BridgeError {
    #[error("rejected while e-stopped: {0}")]
    ConsoleRejected(&'static str),
    #[error("not connected to the rover")]
    NotConnected,
    #[error(transparent)]
    Session(#[from] SessionError),
}

const MAX_QUEUED_EVENTS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BridgeConfig {
    pub drive_period_ms: u64,
    pub log_tail_len: usize,
}

impl Default for BridgeConfig {
    fn default() -> Self {
        Self { drive_period_ms: DRIVE_PERIOD_MS, log_tail_len: 50 }
    }
}

#[derive(Debug)]
pub struct Bridge {
    config: BridgeConfig,
    session: Option<ControlSession>,
    status: ConnectionStatus,
    telemetry: TelemetryReceiver,
    latest: Option<TelemetrySnapshot>,
    log: MissionLog,
    estopped: bool,
    autonomy_active: bool,
    keys: KeySet,
    waypoints: Vec<GeoPoint>,
    pending: BTreeMap<u64, &'static str>,
    next_drive_ms: u64,
    events: VecDeque<ConsoleEvent>,
}

fn us(now_ms: u64) -> u64 {
    now_ms.saturating_mul(1000)
}

impl Bridge {
    pub fn new(config: BridgeConfig) -> Self {
        Self {
            config,
            session: None,
            status: ConnectionStatus::Disconnected,
            telemetry: TelemetryReceiver::new(),
            latest: None,
            log: MissionLog::new(),
            estopped: false,
            autonomy_active: false,
            keys: KeySet::new(),
            waypoints: Vec::new(),
            pending: BTreeMap::new(),
            next_drive_ms: 0,
            events: VecDeque::new(),
        }
    }

    pub fn status(&self) -> ConnectionStatus {
        self.status
    }

    pub fn is_connected(&self) -> bool {
        self.status == ConnectionStatus::Connected
    }

    pub fn latest(&self) -> Option<&TelemetrySnapshot> {
        self.latest.as_ref()
    }

    pub fn log(&self) -> &MissionLog {
        &self.log
    }

    pub fn is_estopped(&self) -> bool {
        self.estopped
    }

    pub fn waypoints(&self) -> &[GeoPoint] {
        &self.waypoints
    }

    pub fn session_mut(&mut self) -> Option<&mut ControlSession> {
        self.session.as_mut()
    }

    /// Takes ownership of a freshly connected session.
    pub fn attach(&mut self, session: ControlSession, now_ms: u64) {
        self.session = Some(session);
        self.pending.clear();
        self.telemetry.reset();
        self.next_drive_ms = now_ms;
        self.set_status(ConnectionStatus::Connected, None, now_ms);
    }

    fn set_status(&mut self, status: ConnectionStatus, reason: Option<String>, now_ms: u64) {
        if self.status == status {
            return;
        }
        self.status = status;
        self.log.append(us(now_ms), LogEvent::Session { connected: status == ConnectionStatus::Connected, reason: reason.clone() });
        self.emit(ConsoleEvent::Status { status, reason });
    }

    fn disconnect(&mut self, reason: String, now_ms: u64) {
        self.session = None;
        self.pending.clear();
        self.set_status(ConnectionStatus::Disconnected, Some(reason), now_ms);
    }

    /// The transport reported EOF or a write error.
    pub fn transport_closed(&mut self, now_ms: u64) {
        if let Some(s) = self.session.as_mut() {
            s.peer_gone();
        }
        self.disconnect(SessionError::PeerGone.to_string(), now_ms);
    }

    fn reject(&mut self, err: BridgeError, now_ms: u64) -> BridgeError {
        let reason = err.to_string();
        self.log.append(us(now_ms), LogEvent::Rejected { reason: reason.clone() });
        self.emit(ConsoleEvent::Rejected { reason });
        err
    }

    fn send(&mut self, message: Message, now_ms: u64) -> Result<u64, BridgeError> {
        let Some(session) = self.session.as_mut() else {
            return Err(self.reject(BridgeError::NotConnected, now_ms));
        };
        let kind = message.kind();
        let seq = session.send(message.clone())?;
        self.pending.insert(seq, kind);
        self.log.append(us(now_ms), LogEvent::CommandSent { seq, message });
        self.emit(ConsoleEvent::Sent { seq, command: kind.to_string() });
        Ok(seq)
    }

    /// Applies an operator command. Returns the sequence number of the
    /// message sent, or `None` when nothing needed sending.
    pub fn submit(&mut self, command: OperatorCommand, now_ms: u64) -> Result<Option<u64>, BridgeError> {
        if !self.is_connected() {
            return Err(self.reject(BridgeError::NotConnected, now_ms));
        }
        let motion = match &command {
            OperatorCommand::Keys { keys } => !keys.is_empty(),
            OperatorCommand::StartAutonomy | OperatorCommand::Arm { .. } => true,
            OperatorCommand::Science { action } => *action == ScienceAction::Drill,
            _ => false,
        };
        if self.estopped && motion {
            return Err(self.reject(BridgeError::ConsoleRejected("motion command"), now_ms));
        }
        let message = match command {
            OperatorCommand::Keys { keys } => {
                self.keys = keys.into_iter().collect();
                if self.keys.is_empty() && (self.autonomy_active || self.estopped) {
                    return Ok(None);
                }
                self.next_drive_ms = now_ms + self.config.drive_period_ms;
                drive_command_from_keys(&self.keys)
            }
            OperatorCommand::EStop => {
                self.estopped = true;
                self.keys.clear();
                Message::EStop
            }
            OperatorCommand::ClearEStop => Message::ClearEStop,
            OperatorCommand::SetWaypoints { points } => {
                self.waypoints = points.clone();
                Message::SetWaypoints { points }
            }
            OperatorCommand::AppendWaypoint { point } => {
                self.waypoints.push(point);
                Message::SetWaypoints { points: self.waypoints.clone() }
            }
            OperatorCommand::StartAutonomy => {
                self.keys.clear();
                Message::StartAutonomy
            }
            OperatorCommand::AbortAutonomy => Message::AbortAutonomy,
            OperatorCommand::Arm { joint, rate } => Message::ArmJoint { joint, rate },
            OperatorCommand::Science { action } => Message::ScienceCommand { action },
        };
        self.send(message, now_ms).map(Some)
    }

    /// Runs heartbeats and the watchdog, handles acks and emits the periodic
    /// drive command. Call at least every `drive_period_ms`.
    pub fn tick(&mut self, now_ms: u64) {
        let Some(session) = self.session.as_mut() else {
            return;
        };
        let dead = match session.poll(now_ms) {
            Liveness::Dead(err) => Some(err.to_string()),
            Liveness::Alive => None,
        };
        if let Some(reason) = dead {
            self.disconnect(reason, now_ms);
            return;
        }
        while let Some(envelope) = self.session.as_mut().and_then(ControlSession::recv) {
            if let Message::Ack { seq, accepted } = envelope.message {
                self.on_ack(seq, accepted, now_ms);
            }
        }
        if now_ms >= self.next_drive_ms {
            self.next_drive_ms = now_ms + self.config.drive_period_ms;
            // deadman: no keys means a zero command, unless the rover is
            // driving itself or latched
            if !self.estopped && (!self.keys.is_empty() || !self.autonomy_active) {
                let _ = self.send(drive_command_from_keys(&self.keys), now_ms);
            }
        }
    }

    fn on_ack(&mut self, seq: u64, accepted: bool, now_ms: u64) {
        let command = self.pending.remove(&seq);
        match command {
            Some("clearEstop") if accepted => self.estopped = false,
            Some("startAutonomy") if accepted => self.autonomy_active = true,
            Some("abortAutonomy") if accepted => self.autonomy_active = false,
            _ => {}
        }
        self.log.append(us(now_ms), LogEvent::Ack { seq, accepted });
        self.emit(ConsoleEvent::Ack { seq, accepted, command: command.map(str::to_string) });
    }

    /// Feeds one telemetry datagram. Stale and malformed datagrams are ignored.
    pub fn ingest_telemetry(&mut self, datagram: &[u8], now_ms: u64) -> bool {
        let Intake::Fresh(snapshot) = self.telemetry.ingest(datagram) else {
            return false;
        };
        self.ingest_snapshot(*snapshot, now_ms);
        true
    }

    pub fn ingest_snapshot(&mut self, snapshot: TelemetrySnapshot, now_ms: u64) {
        if snapshot.estopped {
            self.estopped = true;
        }
        self.autonomy_active = snapshot.autonomy.tag.is_active();
        self.log.append(us(now_ms), LogEvent::Telemetry { snapshot: Box::new(snapshot.clone()) });
        // consoles only ever need the newest snapshot
        self.events.retain(|e| !matches!(e, ConsoleEvent::Telemetry { .. }));
        self.emit(ConsoleEvent::Telemetry { snapshot: Box::new(snapshot.clone()) });
        self.latest = Some(snapshot);
    }

    /// Undrained events are bounded; the oldest go first.
    fn emit(&mut self, event: ConsoleEvent) {
        if self.events.len() >= MAX_QUEUED_EVENTS {
            self.events.pop_front();
        }
        self.events.push_back(event);
    }

    pub fn drain_events(&mut self) -> Vec<ConsoleEvent> {
        self.events.drain(..).collect()
    }

    /// Everything a newly connected console needs to render.
    pub fn sync_events(&self) -> Vec<ConsoleEvent> {
        let mut out = vec![ConsoleEvent::Status { status: self.status, reason: None }];
        if let Some(s) = &self.latest {
            out.push(ConsoleEvent::Telemetry { snapshot: Box::new(s.clone()) });
        }
        out.push(ConsoleEvent::LogTail { records: self.log.tail(self.config.log_tail_len).to_vec() });
        out
    }
}
