//! Transport-agnostic control session.
//!
//! The session never touches a socket or a clock. The owner feeds it received
//! bytes and the current time, and drains the bytes it wants written. That
//! keeps heartbeat and watchdog behaviour testable with a simulated clock.

use std::collections::VecDeque;

use thiserror::Error;

use super::codec::{encode, CodecError, FrameReader};
use super::message::{Envelope, Message};

pub const DEFAULT_HEARTBEAT_INTERVAL_MS: u64 = 500;
pub const DEFAULT_WATCHDOG_MS: u64 = 2_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Base station: opens the connection.
    Client,
    /// Rover: accepts the connection.
    Server,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionConfig {
    pub heartbeat_interval_ms: u64,
    pub watchdog_ms: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self { heartbeat_interval_ms: DEFAULT_HEARTBEAT_INTERVAL_MS, watchdog_ms: DEFAULT_WATCHDOG_MS }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("peer closed or reset the stream")]
    PeerGone,
    #[error("no traffic from peer for {0} ms")]
    HeartbeatTimeout(u64),
    #[error("stream corrupted: {0}")]
    Corrupt(CodecError),
    #[error("message rejected by codec: {0}")]
    Encode(CodecError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Liveness {
    Alive,
    Dead(SessionError),
}

#[derive(Debug)]
pub struct ControlSession {
    role: Role,
    config: SessionConfig,
    next_id: u64,
    heartbeat_seq: u64,
    last_control_in: Option<u64>,
    last_heard_ms: u64,
    last_heartbeat_ms: u64,
    reader: FrameReader,
    outbound: Vec<u8>,
    inbox: VecDeque<Envelope>,
    stale_dropped: u64,
    liveness: Liveness,
}

impl ControlSession {
    pub fn new(role: Role, config: SessionConfig, now_ms: u64) -> Self {
        Self {
            role,
            config,
            next_id: 1,
            heartbeat_seq: 0,
            last_control_in: None,
            last_heard_ms: now_ms,
            last_heartbeat_ms: now_ms,
            reader: FrameReader::new(),
            outbound: Vec::new(),
            inbox: VecDeque::new(),
            stale_dropped: 0,
            liveness: Liveness::Alive,
        }
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn config(&self) -> SessionConfig {
        self.config
    }

    pub fn liveness(&self) -> &Liveness {
        &self.liveness
    }

    pub fn is_alive(&self) -> bool {
        self.liveness == Liveness::Alive
    }

    /// Messages discarded by the monotonic-sequence rule so far.
    pub fn stale_dropped(&self) -> u64 {
        self.stale_dropped
    }

    fn kill(&mut self, err: SessionError) {
        if self.is_alive() {
            log::warn!("{:?} session dead: {err}", self.role);
            self.liveness = Liveness::Dead(err);
        }
    }

    /// Queues `message` for the peer and returns the sequence number it was
    /// stamped with. Sequence numbers are assigned here and nowhere else.
    pub fn send(&mut self, message: Message) -> Result<u64, SessionError> {
        if let Liveness::Dead(e) = &self.liveness {
            return Err(e.clone());
        }
        let id = self.next_id;
        let frame = encode(&Envelope::new(id, message)).map_err(SessionError::Encode)?;
        self.next_id += 1;
        self.outbound.extend_from_slice(&frame);
        Ok(id)
    }

    /// Bytes waiting to be written to the transport.
    pub fn take_outbound(&mut self) -> Vec<u8> {
        std::mem::take(&mut self.outbound)
    }

    pub fn has_outbound(&self) -> bool {
        !self.outbound.is_empty()
    }

    /// Feeds bytes read from the transport.
    pub fn receive_bytes(&mut self, bytes: &[u8], now_ms: u64) {
        if !self.is_alive() {
            return;
        }
        self.reader.push(bytes);
        loop {
            match self.reader.next_frame() {
                Ok(Some(envelope)) => {
                    self.last_heard_ms = now_ms;
                    self.accept(envelope);
                }
                Ok(None) => break,
                Err(e) => {
                    self.kill(SessionError::Corrupt(e));
                    break;
                }
            }
        }
    }

    fn accept(&mut self, envelope: Envelope) {
        let message = &envelope.message;
        if matches!(message, Message::Heartbeat { .. }) {
            return;
        }
        if message.is_control() {
            // e-stop is never discarded, however late it arrives
            let stale = self.last_control_in.is_some_and(|last| envelope.id <= last);
            if stale && *message != Message::EStop {
                self.stale_dropped += 1;
                let _ = self.send(Message::Ack { seq: envelope.id, accepted: false });
                return;
            }
            self.last_control_in = Some(self.last_control_in.map_or(envelope.id, |l| l.max(envelope.id)));
        }
        self.inbox.push_back(envelope);
    }

    /// Next received message, in arrival order.
    pub fn recv(&mut self) -> Option<Envelope> {
        self.inbox.pop_front()
    }

    /// Sends a heartbeat when one is due and runs the watchdog.
    pub fn poll(&mut self, now_ms: u64) -> &Liveness {
        if self.is_alive() {
            if now_ms.saturating_sub(self.last_heard_ms) >= self.config.watchdog_ms {
                self.kill(SessionError::HeartbeatTimeout(self.config.watchdog_ms));
            } else if now_ms.saturating_sub(self.last_heartbeat_ms) >= self.config.heartbeat_interval_ms {
                self.last_heartbeat_ms = now_ms;
                self.heartbeat_seq += 1;
                let seq = self.heartbeat_seq;
                let _ = self.send(Message::Heartbeat { seq });
            }
        }
        &self.liveness
    }

    /// The transport reported EOF or a reset.
    pub fn peer_gone(&mut self) {
        self.kill(SessionError::PeerGone);
    }
}
