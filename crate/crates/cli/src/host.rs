//! Runs the onboard controller against a simulated vehicle, served over real
//! sockets: TCP control on one port, UDP telemetry back to the operator.

use std::net::{IpAddr, SocketAddr, TcpListener};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use anyhow::Context;
use rover_core::onboard::ControllerConfig;
use rover_core::protocol::net::{TcpLink, UdpTelemetryTx};
use rover_core::sim::{RoverNode, Scenario};
use rover_core::sim::RoverPose;

#[derive(Debug, Clone)]
pub struct HostOptions {
    pub config: ControllerConfig,
    pub scenario: Scenario,
    pub seed: u64,
    pub bind: IpAddr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HostSummary {
    pub sessions: usize,
    pub telemetry_sent: usize,
    pub final_pose: RoverPose,
}

/// Serves until `stop` is raised. `ready` receives the bound control address.
pub fn serve(opts: &HostOptions, stop: Arc<AtomicBool>, ready: impl FnOnce(SocketAddr)) -> anyhow::Result<HostSummary> {
    let mut world = opts.scenario.build_world(opts.seed)?;
    let mut rover = RoverNode::new(opts.config.clone());
    rover.controller_mut().set_arm_payload(opts.scenario.arm_payload_kg);

    let listener = TcpListener::bind((opts.bind, opts.config.control_port))
        .with_context(|| format!("binding control port {}", opts.config.control_port))?;
    listener.set_nonblocking(true)?;
    ready(listener.local_addr()?);

    let tick = Duration::from_millis(opts.config.tick_ms);
    let started = Instant::now();
    let mut deadline = started;
    let mut link: Option<TcpLink> = None;
    let mut telemetry: Option<UdpTelemetryTx> = None;
    let mut ticks = 0u64;
    let mut summary = HostSummary { sessions: 0, telemetry_sent: 0, final_pose: world.rover };

    while !stop.load(Ordering::Relaxed) {
        let now = started.elapsed().as_millis() as u64;

        if let Ok((stream, peer)) = listener.accept() {
            // the newest operator replaces any previous one
            log::info!("operator connected from {peer}");
            link = Some(TcpLink::from_stream(stream)?);
            rover.accept(now);
            summary.sessions += 1;
            let target = SocketAddr::new(peer.ip(), opts.config.telemetry_port);
            match telemetry.as_mut() {
                Some(tx) => tx.set_target(target),
                None => telemetry = Some(UdpTelemetryTx::new(target)?),
            }
        }

        if let (Some(l), Some(session)) = (link.as_mut(), rover.session_mut()) {
            l.pump(session, now);
        }
        let telemetry_now = rover.service_link(now);
        if !rover.has_session() && link.take().is_some() {
            log::warn!("operator link lost; failsafe engaged");
        }

        world.gps_available = !opts.scenario.gps_outages.iter().any(|o| (o.from_ms..o.to_ms).contains(&now));
        rover.control_tick(&mut world, opts.config.tick_ms);
        ticks += 1;

        let scheduled = ticks.is_multiple_of(u64::from(opts.config.telemetry_every_ticks.max(1)));
        if let (true, Some(tx)) = (scheduled || telemetry_now, telemetry.as_mut()) {
            if rover.has_session() {
                tx.send(&rover.snapshot(&mut world));
                summary.telemetry_sent += 1;
            }
        }
        if let (Some(l), Some(session)) = (link.as_mut(), rover.session_mut()) {
            l.pump(session, now);
        }

        deadline += tick;
        match deadline.checked_duration_since(Instant::now()) {
            Some(wait) => thread::sleep(wait),
            None => deadline = Instant::now(),
        }
    }
    summary.final_pose = world.rover;
    Ok(summary)
}
