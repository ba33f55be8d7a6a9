//! Base-station runtime: one TCP control session to the rover, UDP telemetry
//! intake, console fan-out and an append-only mission log on disk.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use anyhow::Context;
use rover_core::basestation::log::ndjson_line;
use rover_core::basestation::{export_trail, Bridge, BridgeConfig, GeoBounds, LogRecord, OperatorCommand, TrailOptions};
use rover_core::onboard::TelemetrySnapshot;
use rover_core::protocol::net::{TcpLink, UdpTelemetryRx};
use rover_core::protocol::{ControlSession, Role, SessionConfig};

use crate::console::ConsoleHub;

const LOOP_PERIOD: Duration = Duration::from_millis(10);
const RECONNECT_EVERY_MS: u64 = 1000;
const SYNC_EVERY_MS: u64 = 250;

#[derive(Debug, Clone)]
pub struct StationOptions {
    /// `host:port` of the rover's control listener.
    pub rover: String,
    pub telemetry_port: u16,
    pub session: SessionConfig,
    pub log_dir: Option<PathBuf>,
    /// Background image for the exported trail map.
    pub map: Option<String>,
    pub bounds: Option<GeoBounds>,
    /// Terminal key presses are released after this long without a repeat.
    pub key_hold_ms: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StationSummary {
    pub commands_sent: usize,
    pub telemetry_received: usize,
    pub log_records: usize,
    pub trail_points: usize,
    pub last_snapshot: Option<TelemetrySnapshot>,
}

/// Latest-wins hand-off from the UDP thread to the control loop.
#[derive(Default)]
struct Intake {
    slot: Mutex<Option<TelemetrySnapshot>>,
    reset: AtomicBool,
}

fn spawn_intake(port: u16, intake: Arc<Intake>, stop: Arc<AtomicBool>) -> anyhow::Result<thread::JoinHandle<()>> {
    let mut rx = UdpTelemetryRx::bind(("0.0.0.0", port)).with_context(|| format!("binding telemetry port {port}"))?;
    Ok(thread::Builder::new().name("telemetry".into()).spawn(move || {
        while !stop.load(Ordering::Relaxed) {
            if intake.reset.swap(false, Ordering::Relaxed) {
                rx.receiver_mut().reset();
            }
            if let Some(s) = rx.poll() {
                *intake.slot.lock().expect("intake lock") = Some(s);
            }
            thread::sleep(Duration::from_millis(5));
        }
    })?)
}

fn spawn_log_writer(dir: PathBuf) -> anyhow::Result<(mpsc::Sender<LogRecord>, thread::JoinHandle<()>)> {
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join("mission.ndjson");
    let mut out = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    let (tx, rx) = mpsc::channel::<LogRecord>();
    let handle = thread::Builder::new().name("mission-log".into()).spawn(move || {
        for record in rx {
            let ok = out.write_all(ndjson_line(&record).as_bytes()).and_then(|_| out.flush());
            if let Err(e) = ok {
                log::error!("mission log write failed: {e}");
                return;
            }
        }
    })?;
    Ok((tx, handle))
}

/// Runs until `stop` is raised, then writes the trail exports.
///
/// `console` carries commands from browser consoles, `terminal` from stdin;
/// only the latter gets key auto-release, since browsers report key-up.
pub fn run_station(
    opts: &StationOptions,
    hub: &ConsoleHub,
    console: Receiver<OperatorCommand>,
    terminal: Option<Receiver<OperatorCommand>>,
    stop: Arc<AtomicBool>,
) -> anyhow::Result<StationSummary> {
    let intake = Arc::new(Intake::default());
    let intake_thread = spawn_intake(opts.telemetry_port, intake.clone(), stop.clone())?;
    let (log_tx, log_thread) = match &opts.log_dir {
        Some(dir) => {
            let (tx, h) = spawn_log_writer(dir.clone())?;
            (Some(tx), Some(h))
        }
        None => (None, None),
    };

    let started = Instant::now();
    let now_ms = || started.elapsed().as_millis() as u64;
    let mut bridge = Bridge::new(BridgeConfig::default());
    let mut link: Option<TcpLink> = None;
    let mut next_connect = 0u64;
    let mut next_sync = 0u64;
    let mut release_keys_at: Option<u64> = None;
    let mut logged = 0usize;
    let mut summary = StationSummary::default();

    while !stop.load(Ordering::Relaxed) {
        let now = now_ms();

        if link.is_none() && now >= next_connect {
            next_connect = now + RECONNECT_EVERY_MS;
            match TcpLink::connect(opts.rover.as_str(), Duration::from_millis(500)) {
                Ok(l) => {
                    log::info!("connected to rover at {}", opts.rover);
                    link = Some(l);
                    intake.reset.store(true, Ordering::Relaxed);
                    bridge.attach(ControlSession::new(Role::Client, opts.session, now), now);
                }
                Err(e) => log::debug!("rover not reachable: {e}"),
            }
        }

        let mut submit = |bridge: &mut Bridge, cmd: OperatorCommand| match bridge.submit(cmd, now) {
            Ok(Some(_)) => summary.commands_sent += 1,
            Ok(None) => {}
            Err(e) => log::warn!("command not sent: {e}"),
        };
        while let Ok(cmd) = console.try_recv() {
            submit(&mut bridge, cmd);
        }
        if let Some(terminal) = &terminal {
            while let Ok(cmd) = terminal.try_recv() {
                if let OperatorCommand::Keys { keys } = &cmd {
                    release_keys_at = (!keys.is_empty()).then_some(now + opts.key_hold_ms);
                }
                submit(&mut bridge, cmd);
            }
        }
        if release_keys_at.is_some_and(|t| now >= t) {
            release_keys_at = None;
            submit(&mut bridge, OperatorCommand::Keys { keys: Vec::new() });
        }

        if let (Some(l), Some(session)) = (link.as_mut(), bridge.session_mut()) {
            l.pump(session, now);
        }
        bridge.tick(now);
        if let (Some(l), Some(session)) = (link.as_mut(), bridge.session_mut()) {
            l.pump(session, now);
        }
        if !bridge.is_connected() && link.take().is_some() {
            log::warn!("rover link lost; retrying");
        }

        if let Some(s) = intake.slot.lock().expect("intake lock").take() {
            summary.telemetry_received += 1;
            bridge.ingest_snapshot(s, now);
        }

        for event in bridge.drain_events() {
            hub.publish(&event);
        }
        if now >= next_sync {
            next_sync = now + SYNC_EVERY_MS;
            hub.set_sync(&bridge.sync_events());
        }
        let records = bridge.log().records();
        if let Some(tx) = &log_tx {
            for r in &records[logged..] {
                let _ = tx.send(r.clone());
            }
        }
        logged = records.len();

        thread::sleep(LOOP_PERIOD);
    }

    drop(log_tx);
    if let Some(h) = log_thread {
        let _ = h.join();
    }
    let _ = intake_thread.join();

    summary.log_records = bridge.log().len();
    summary.last_snapshot = bridge.latest().cloned();
    if let Some(dir) = &opts.log_dir {
        let options = TrailOptions { bounds: opts.bounds, background_href: opts.map.clone(), ..TrailOptions::default() };
        match export_trail(bridge.log(), &options) {
            Ok(export) => {
                std::fs::write(dir.join("trail.svg"), &export.svg)?;
                std::fs::write(dir.join("trail.csv"), &export.csv)?;
                summary.trail_points = export.trail.len();
            }
            Err(e) => log::info!("no trail exported: {e}"),
        }
    }
    Ok(summary)
}
