//! Offline trail export: SVG plot and CSV of the fixes in a mission log.

use std::fmt::Write as _;
use std::io::{Read, Write};

use thiserror::Error;

use crate::geodesy::GeoPoint;
use crate::protocol::message::Message;

use super::log::{LogEvent, MissionLog};
use super::map::{project_in, Canvas, GeoBounds};

#[derive(Debug, Error)]
pub enum TrailError {
    #[error("mission log contains no position fixes")]
    EmptyLog,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("csv row {row}: bad coordinate")]
    BadPoint { row: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrailPoint {
    /// Rover clock, milliseconds.
    pub t: u64,
    pub point: GeoPoint,
}

#[derive(Debug, Clone)]
pub struct TrailOptions {
    pub canvas: Canvas,
    /// Fixed map bounds; grown to fit the trail. Fitted to the data when absent.
    pub bounds: Option<GeoBounds>,
    /// Background image drawn under the trail.
    pub background_href: Option<String>,
}

impl Default for TrailOptions {
    fn default() -> Self {
        Self { canvas: Canvas { width: 800, height: 600 }, bounds: None, background_href: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrailExport {
    pub svg: String,
    pub csv: String,
    pub trail: Vec<TrailPoint>,
    pub waypoints: Vec<GeoPoint>,
}

/// Fixes carried by telemetry records, in log order.
pub fn trail_from_log(log: &MissionLog) -> Vec<TrailPoint> {
    log.records()
        .iter()
        .filter_map(|r| match &r.event {
            LogEvent::Telemetry { snapshot } => snapshot.fix.position().map(|point| TrailPoint { t: snapshot.t, point }),
            _ => None,
        })
        .collect()
}

/// The most recently dispatched waypoint list.
pub fn waypoints_from_log(log: &MissionLog) -> Vec<GeoPoint> {
    log.records()
        .iter()
        .rev()
        .find_map(|r| match &r.event {
            LogEvent::CommandSent { message: Message::SetWaypoints { points }, .. } => Some(points.clone()),
            _ => None,
        })
        .unwrap_or_default()
}

pub fn export_trail(log: &MissionLog, options: &TrailOptions) -> Result<TrailExport, TrailError> {
    let trail = trail_from_log(log);
    if trail.is_empty() {
        return Err(TrailError::EmptyLog);
    }
    let waypoints = waypoints_from_log(log);

    let mut bounds = options.bounds.unwrap_or_else(|| GeoBounds::around(trail[0].point));
    for p in trail.iter().map(|t| t.point).chain(waypoints.iter().copied()) {
        bounds.expand_to(p);
    }
    let canvas = options.canvas;
    let (w, h) = (canvas.width, canvas.height);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    if let Some(href) = &options.background_href {
        let _ = writeln!(svg, r#"  <image href="{}" x="0" y="0" width="{w}" height="{h}" preserveAspectRatio="none"/>"#, xml_escape(href));
    }
    let points: Vec<String> = trail
        .iter()
        .map(|t| {
            let (x, y) = project_in(&bounds, t.point, canvas);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    let _ = writeln!(svg, r##"  <polyline class="trail" fill="none" stroke="#d62728" stroke-width="2" points="{}"/>"##, points.join(" "));
    for (i, wp) in waypoints.iter().enumerate() {
        let (x, y) = project_in(&bounds, *wp, canvas);
        let _ = writeln!(svg, r##"  <circle class="waypoint" data-index="{i}" cx="{x:.2}" cy="{y:.2}" r="5" fill="#1f77b4"/>"##);
    }
    svg.push_str("</svg>\n");

    let mut csv_buf = Vec::new();
    write_trail_csv(&trail, &mut csv_buf)?;
    let csv = String::from_utf8(csv_buf).expect("csv writer emits utf-8");
    Ok(TrailExport { svg, csv, trail, waypoints })
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('"', "&quot;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Coordinates are written in shortest round-trip form, so reading the file
/// back yields bit-identical values.
pub fn write_trail_csv<W: Write>(trail: &[TrailPoint], out: W) -> Result<(), TrailError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "lat", "lon"])?;
    for p in trail {
        w.write_record([p.t.to_string(), p.point.lat().to_string(), p.point.lon().to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_trail_csv<R: Read>(input: R) -> Result<Vec<TrailPoint>, TrailError> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (i, row) in r.deserialize::<(u64, f64, f64)>().enumerate() {
        let (t, lat, lon) = row?;
        let point = GeoPoint::new(lat, lon).map_err(|_| TrailError::BadPoint { row: i + 1 })?;
        out.push(TrailPoint { t, point });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nmea::GpsFix;
    use crate::onboard::{AutonomyStatus, AutonomyTag, Orientation, TelemetrySnapshot};

    fn snap(t: u64, lat: f64, lon: f64) -> TelemetrySnapshot {
        TelemetrySnapshot {
            t,
            co2_ppm: None,
            co_ppm: None,
            air_temp_c: None,
            humidity_pct: None,
            soil_temp_c: None,
            soil_moisture: None,
            orientation: Orientation::default(),
            fix: GpsFix::at(GeoPoint::new(lat, lon).unwrap()),
            autonomy: AutonomyStatus { tag: AutonomyTag::Idle, waypoint_index: 0, waypoint_count: 0, fault_reason: None },
            power: Vec::new(),
            estopped: false,
            arm_overload: false,
            camera_online: true,
        }
    }

    fn two_fix_log() -> MissionLog {
        let mut log = MissionLog::new();
        log.append(1, LogEvent::Telemetry { snapshot: Box::new(snap(100, 23.780001, 90.420003)) });
        log.append(2, LogEvent::Telemetry { snapshot: Box::new(snap(300, 23.780101, 90.420103)) });
        log
    }

    #[test]
    fn two_fixes() {
        let out = export_trail(&two_fix_log(), &TrailOptions::default()).unwrap();
        assert_eq!(out.svg.matches("<polyline").count(), 1);
        let pts = out.svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(pts.split(' ').count(), 2);
        assert_eq!(out.csv.lines().count(), 3);
        assert!(!out.svg.contains("class=\"waypoint\""));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let out = export_trail(&two_fix_log(), &TrailOptions::default()).unwrap();
        assert_eq!(read_trail_csv(out.csv.as_bytes()).unwrap(), out.trail);
    }

    #[test]
    fn one_marker_per_waypoint() {
        let mut log = two_fix_log();
        let wps: Vec<GeoPoint> = (0..3).map(|i| GeoPoint::new(23.78 + i as f64 * 1e-4, 90.42).unwrap()).collect();
        log.append(3, LogEvent::CommandSent { seq: 1, message: Message::SetWaypoints { points: wps } });
        let out = export_trail(&log, &TrailOptions { background_href: Some("map.png".into()), ..Default::default() }).unwrap();
        assert_eq!(out.svg.matches("class=\"waypoint\"").count(), 3);
        assert!(out.svg.contains("href=\"map.png\""));
    }

    #[test]
    fn empty_log() {
        assert!(matches!(export_trail(&MissionLog::new(), &TrailOptions::default()), Err(TrailError::EmptyLog)));
    }
}
