use proptest::prelude::*;
use rover_core::basestation::map::project_in;
use rover_core::basestation::trail::write_trail_csv;
use rover_core::basestation::{
    drive_command_from_keys, read_trail_csv, Bridge, BridgeConfig, Canvas, ConsoleEvent, GeoBounds, Key, KeySet, LogEvent,
    MapView, MissionLog, OperatorCommand, TrailPoint,
};
use rover_core::protocol::{ControlSession, FrameReader, Role, SessionConfig};
use rover_core::{GeoPoint, Message};

fn geo() -> impl Strategy<Value = GeoPoint> {
    (-90.0f64..=90.0, -180.0f64..180.0).prop_map(|(lat, lon)| GeoPoint::new(lat, lon).unwrap())
}

fn key() -> impl Strategy<Value = Key> {
    prop_oneof![Just(Key::W), Just(Key::A), Just(Key::S), Just(Key::D)]
}

fn operator_command() -> impl Strategy<Value = OperatorCommand> {
    prop_oneof![
        4 => prop::collection::vec(key(), 0..4).prop_map(|keys| OperatorCommand::Keys { keys }),
        1 => Just(OperatorCommand::EStop),
        1 => Just(OperatorCommand::ClearEStop),
        1 => Just(OperatorCommand::StartAutonomy),
        1 => Just(OperatorCommand::AbortAutonomy),
        1 => geo().prop_map(|point| OperatorCommand::AppendWaypoint { point }),
    ]
}

proptest! {
    #[test]
    fn trail_csv_round_trip_is_exact(points in prop::collection::vec((any::<u64>(), geo()), 0..100)) {
        let trail: Vec<TrailPoint> = points.into_iter().map(|(t, point)| TrailPoint { t, point }).collect();
        let mut buf = Vec::new();
        write_trail_csv(&trail, &mut buf).unwrap();
        prop_assert_eq!(read_trail_csv(buf.as_slice()).unwrap(), trail);
    }

    #[test]
    fn log_timestamps_strictly_increase_and_replay(stamps in prop::collection::vec(0u64..10_000, 1..200)) {
        let mut log = MissionLog::new();
        for (i, t) in stamps.iter().enumerate() {
            log.append(*t, LogEvent::Rejected { reason: format!("r{i}") });
        }
        prop_assert!(log.records().windows(2).all(|w| w[0].t_us < w[1].t_us));
        let mut buf = Vec::new();
        log.write_ndjson(&mut buf).unwrap();
        prop_assert_eq!(MissionLog::read_ndjson(buf.as_slice()).unwrap(), log);
    }

    #[test]
    fn projection_round_trips(a in geo(), b in geo(), u in 0.0f64..=1.0, v in 0.0f64..=1.0) {
        let bounds = GeoBounds::from_corners(a, b);
        let p = GeoPoint::new(bounds.south + v * (bounds.north - bounds.south), bounds.west + u * (bounds.east - bounds.west)).unwrap();
        let canvas = Canvas { width: 1024, height: 768 };
        let px = project_in(&bounds, p, canvas);
        prop_assert!((0.0..=1024.0 + 1e-6).contains(&px.0) && (0.0..=768.0 + 1e-6).contains(&px.1));
        let back = MapView::new(bounds).unproject(px, canvas).unwrap();
        prop_assert!((back.lat() - p.lat()).abs() < 1e-9 && (back.lon() - p.lon()).abs() < 1e-9);
    }

    #[test]
    fn keys_map_to_bounded_drive(keys in prop::collection::vec(key(), 0..6)) {
        let set: KeySet = keys.into_iter().collect();
        let Message::Drive { throttle, steer_deg } = drive_command_from_keys(&set) else { unreachable!() };
        prop_assert!(throttle.abs() <= 1.0 && steer_deg.abs() <= 35.0);
        if set.contains(&Key::W) && set.contains(&Key::S) {
            prop_assert_eq!(throttle, 0.0);
        }
        if set.contains(&Key::A) && set.contains(&Key::D) {
            prop_assert_eq!(steer_deg, 0.0);
        }
    }

    /// Whatever mix of surfaces issues commands, one queue numbers them.
    #[test]
    fn bridge_assigns_sequence_numbers_at_one_point(cmds in prop::collection::vec((operator_command(), 0u64..120), 1..80)) {
        let mut bridge = Bridge::new(BridgeConfig::default());
        bridge.attach(ControlSession::new(Role::Client, SessionConfig::default(), 0), 0);
        let mut reader = FrameReader::new();
        let mut ids = Vec::new();
        let mut sent = Vec::new();
        let mut now = 0;
        for (cmd, wait) in cmds {
            now += wait;
            let _ = bridge.submit(cmd, now);
            bridge.tick(now);
            reader.push(&bridge.session_mut().unwrap().take_outbound());
            while let Some(e) = reader.next_frame().unwrap() {
                ids.push(e.id);
            }
            for ev in bridge.drain_events() {
                if let ConsoleEvent::Sent { seq, .. } = ev {
                    sent.push(seq);
                }
            }
            // keep the session alive without a peer
            if now > 1500 {
                break;
            }
        }
        prop_assert!(ids.windows(2).all(|w| w[0] < w[1]), "{:?}", ids);
        prop_assert!(sent.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(sent.iter().all(|s| ids.contains(s)));
    }
}
