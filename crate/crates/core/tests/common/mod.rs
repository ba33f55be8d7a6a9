#![allow(dead_code)]

use rover_core::onboard::ControllerConfig;
use rover_core::sim::scenario::{Pose, ScriptedCommand};
use rover_core::sim::{MissionReport, NoiseModel};
use rover_core::basestation::{Key, OperatorCommand};
use rover_core::geodesy::destination_point;
use rover_core::{EarthModel, GeoPoint, HeadingDeg, Mission, Scenario};

/// Central angle by the spherical special case of Vincenty's formula, which
/// stays well conditioned at every separation. Written independently of the
/// haversine code it checks.
pub fn vincenty_distance_m(a: (f64, f64), b: (f64, f64), radius_m: f64) -> f64 {
    let (p1, l1) = (a.0.to_radians(), a.1.to_radians());
    let (p2, l2) = (b.0.to_radians(), b.1.to_radians());
    let dl = l2 - l1;
    let num = ((p2.cos() * dl.sin()).powi(2) + (p1.cos() * p2.sin() - p1.sin() * p2.cos() * dl.cos()).powi(2)).sqrt();
    let den = p1.sin() * p2.sin() + p1.cos() * p2.cos() * dl.cos();
    radius_m * num.atan2(den)
}

pub fn run_course(noise: NoiseModel, seed: u64) -> MissionReport {
    let scenario = Scenario::field_course(noise);
    let mut mission = Mission::from_scenario(&scenario, seed, ControllerConfig::default()).expect("course builds");
    mission.run(scenario.duration_ms())
}

/// Starts `start_m` from base heading straight away with W held, so the rover
/// drives out of radio range.
pub fn drive_out_of_range(start_m: f64, seed: u64) -> Mission {
    let earth = EarthModel::default();
    let base = GeoPoint::new(23.78, 90.407).unwrap();
    let start = destination_point(base, HeadingDeg::new(0.0), start_m, earth);
    let mut s = Scenario::field_course(NoiseModel::default());
    s.name = "drive-out-of-range".into();
    s.base = Some(base);
    s.start = Pose { lat: start.lat(), lon: start.lon(), heading_deg: 0.0 };
    s.autostart = false;
    s.waypoints.clear();
    s.script = vec![ScriptedCommand { at_ms: 0, command: OperatorCommand::Keys { keys: vec![Key::W] } }];
    Mission::from_scenario(&s, seed, ControllerConfig::default()).expect("scenario builds")
}
