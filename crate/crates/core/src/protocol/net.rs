//! Socket adapters for the control session and the telemetry channel.
//!
//! Sockets are non-blocking; the owning loop calls `pump`/`poll` once per tick.

use std::io::{self, ErrorKind, Read, Write};
use std::net::{SocketAddr, TcpStream, ToSocketAddrs, UdpSocket};
use std::time::Duration;

use super::datagram::{Intake, TelemetryReceiver, TelemetrySender};
use super::session::ControlSession;
use crate::onboard::telemetry::TelemetrySnapshot;

pub const DEFAULT_CONTROL_PORT: u16 = 7401;
pub const DEFAULT_TELEMETRY_PORT: u16 = 7402;

/// A TCP stream driving one [`ControlSession`].
#[derive(Debug)]
pub struct TcpLink {
    stream: TcpStream,
    pending: Vec<u8>,
}

impl TcpLink {
    pub fn connect<A: ToSocketAddrs>(addr: A, timeout: Duration) -> io::Result<Self> {
        let mut last_err = io::Error::new(ErrorKind::InvalidInput, "no address resolved");
        for a in addr.to_socket_addrs()? {
            match TcpStream::connect_timeout(&a, timeout) {
                Ok(s) => return Self::from_stream(s),
                Err(e) => last_err = e,
            }
        }
        Err(last_err)
    }

    pub fn from_stream(stream: TcpStream) -> io::Result<Self> {
        stream.set_nonblocking(true)?;
        stream.set_nodelay(true)?;
        Ok(Self { stream, pending: Vec::new() })
    }

    pub fn peer_addr(&self) -> io::Result<SocketAddr> {
        self.stream.peer_addr()
    }

    /// Flushes what the session wants written and feeds it whatever arrived.
    /// EOF or a hard socket error marks the session's peer as gone.
    pub fn pump(&mut self, session: &mut ControlSession, now_ms: u64) {
        self.pending.extend(session.take_outbound());
        while !self.pending.is_empty() {
            match self.stream.write(&self.pending) {
                Ok(0) => {
                    session.peer_gone();
                    return;
                }
                Ok(n) => {
                    self.pending.drain(..n);
                }
                Err(e) if e.kind() == ErrorKind::WouldBlock => break,
                Err(e) if e.kind() == ErrorKind::Interrupted => continue,
                Err(_) => {
                    session.peer_gone();
                    return;
                }
            }
        }
        let mut buf = [0u8; 8192];
        loop {
            match self.stream.read(&mut buf) {
                Ok(0) => {
                    session.peer_gone();
                    return;
                }
                Ok(n) => session.receive_bytes(&buf[..n], now_ms),
                Err(e) if e.kind() == ErrorKind::WouldBlock => return,
                Err(e) if e.kind() == ErrorKind::Interrupted => continue,
                Err(_) => {
                    session.peer_gone();
                    return;
                }
            }
        }
    }
}

/// Fire-and-forget telemetry datagrams.
#[derive(Debug)]
pub struct UdpTelemetryTx {
    socket: UdpSocket,
    target: SocketAddr,
    sender: TelemetrySender,
}

impl UdpTelemetryTx {
    pub fn new(target: SocketAddr) -> io::Result<Self> {
        let bind: SocketAddr = if target.is_ipv4() { "0.0.0.0:0" } else { "[::]:0" }.parse().expect("literal address");
        let socket = UdpSocket::bind(bind)?;
        Ok(Self { socket, target, sender: TelemetrySender::new() })
    }

    pub fn set_target(&mut self, target: SocketAddr) {
        self.target = target;
    }

    /// Send errors are swallowed: a lost snapshot is superseded by the next.
    pub fn send(&mut self, snapshot: &TelemetrySnapshot) {
        match self.sender.datagram(snapshot) {
            Ok(bytes) => {
                if let Err(e) = self.socket.send_to(&bytes, self.target) {
                    log::debug!("telemetry send failed: {e}");
                }
            }
            Err(e) => log::warn!("telemetry snapshot not encodable: {e}"),
        }
    }
}

#[derive(Debug)]
pub struct UdpTelemetryRx {
    socket: UdpSocket,
    receiver: TelemetryReceiver,
}

impl UdpTelemetryRx {
    pub fn bind<A: ToSocketAddrs>(addr: A) -> io::Result<Self> {
        let socket = UdpSocket::bind(addr)?;
        socket.set_nonblocking(true)?;
        Ok(Self { socket, receiver: TelemetryReceiver::new() })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.socket.local_addr()
    }

    /// Drains every queued datagram and returns the newest fresh snapshot.
    pub fn poll(&mut self) -> Option<TelemetrySnapshot> {
        let mut buf = vec![0u8; super::codec::MAX_PAYLOAD_LEN + super::codec::HEADER_LEN];
        let mut newest = None;
        loop {
            match self.socket.recv_from(&mut buf) {
                Ok((n, _)) => {
                    if let Intake::Fresh(s) = self.receiver.ingest(&buf[..n]) {
                        newest = Some(*s);
                    }
                }
                Err(e) if e.kind() == ErrorKind::WouldBlock => return newest,
                Err(e) if e.kind() == ErrorKind::Interrupted => continue,
                Err(e) => {
                    log::debug!("telemetry receive failed: {e}");
                    return newest;
                }
            }
        }
    }

    pub fn receiver_mut(&mut self) -> &mut TelemetryReceiver {
        &mut self.receiver
    }
}
