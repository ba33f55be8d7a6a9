//! Rover host and base station talking over real loopback sockets.

use std::net::{Ipv4Addr, UdpSocket};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::Duration;

use rover_cli::console::ConsoleHub;
use rover_cli::host::{serve, HostOptions};
use rover_cli::station::{run_station, StationOptions};
use rover_core::basestation::{Key, OperatorCommand};
use rover_core::onboard::ControllerConfig;
use rover_core::protocol::SessionConfig;
use rover_core::sim::NoiseModel;
use rover_core::geodesy::haversine_distance;
use rover_core::{EarthModel, Scenario};

fn free_udp_port() -> u16 {
    UdpSocket::bind((Ipv4Addr::LOCALHOST, 0)).unwrap().local_addr().unwrap().port()
}

#[test]
fn drive_estop_and_reconnect_over_sockets() {
    let telemetry_port = free_udp_port();
    let config = ControllerConfig { control_port: 0, telemetry_port, ..ControllerConfig::default() };
    let host_opts = HostOptions {
        config,
        scenario: Scenario::field_course(NoiseModel::NONE),
        seed: 1,
        bind: Ipv4Addr::LOCALHOST.into(),
    };
    let host_stop = Arc::new(AtomicBool::new(false));
    let (addr_tx, addr_rx) = mpsc::channel();
    let host = {
        let stop = host_stop.clone();
        thread::spawn(move || serve(&host_opts, stop, |a| addr_tx.send(a).unwrap()).unwrap())
    };
    let rover_addr = addr_rx.recv_timeout(Duration::from_secs(5)).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let station_opts = StationOptions {
        rover: rover_addr.to_string(),
        telemetry_port,
        session: SessionConfig::default(),
        log_dir: Some(dir.path().to_path_buf()),
        map: None,
        bounds: None,
        key_hold_ms: 300,
    };
    let run = |script: Vec<(u64, OperatorCommand)>, total_ms: u64| {
        let (hub, console_rx) = ConsoleHub::new(None);
        let sender = hub.command_sender();
        let stop = Arc::new(AtomicBool::new(false));
        let opts = station_opts.clone();
        let station = {
            let stop = stop.clone();
            thread::spawn(move || run_station(&opts, &hub, console_rx, None, stop).unwrap())
        };
        let mut elapsed = 0;
        for (at, cmd) in script {
            thread::sleep(Duration::from_millis(at - elapsed));
            elapsed = at;
            sender.send(cmd).unwrap();
        }
        thread::sleep(Duration::from_millis(total_ms - elapsed));
        stop.store(true, Ordering::Relaxed);
        station.join().unwrap()
    };

    let first = run(
        vec![(800, OperatorCommand::Keys { keys: vec![Key::W] }), (2000, OperatorCommand::EStop)],
        3000,
    );
    assert!(first.telemetry_received >= 5, "{first:?}");
    let last = first.last_snapshot.unwrap();
    assert!(last.estopped);
    assert!(first.commands_sent >= 2);
    assert!(first.trail_points > 0);
    assert!(dir.path().join("mission.ndjson").exists());
    assert!(dir.path().join("trail.svg").exists());

    // a second station picks up where the first left off: still e-stopped
    // until cleared, and then fresh telemetry flows again
    let second = run(vec![(800, OperatorCommand::ClearEStop)], 2000);
    assert!(second.telemetry_received >= 3, "{second:?}");
    assert!(!second.last_snapshot.unwrap().estopped);

    host_stop.store(true, Ordering::Relaxed);
    let summary = host.join().unwrap();
    assert_eq!(summary.sessions, 2);
    let start = Scenario::field_course(NoiseModel::NONE).start_point().unwrap();
    let moved = haversine_distance(start, summary.final_pose.pos, EarthModel::default());
    assert!(moved > 0.3, "rover drove on W, moved {moved} m");
}
