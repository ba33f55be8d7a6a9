//! GPS + compass waypoint traversal with a short-range vision phase.
//!
//! ```text
//! Idle ─start─▶ AlignHeading ─aligned─▶ TraverseGps ─GPS ≤ vision radius and marker seen─▶ VisionApproach
//!                   ▲   ◀─heading error too large─┘                                            │
//!                   └──────────────────── marker within arrival radius ◀────────────────────────┤
//!                                                              (last waypoint) Arrived ◀────────┘
//! any active state ─no fix / link lost / e-stop─▶ Fault
//! ```

use serde::{Deserialize, Serialize};

use crate::geodesy::{angular_difference, haversine_distance, initial_bearing, EarthModel, GeoPoint, HeadingDeg};
use crate::nmea::GpsFix;

use super::drive::{clamp_steer, DriveState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum AutonomyTag {
    Idle,
    AlignHeading,
    TraverseGps,
    VisionApproach,
    Arrived,
    Fault,
}

impl AutonomyTag {
    pub fn is_active(self) -> bool {
        matches!(self, Self::AlignHeading | Self::TraverseGps | Self::VisionApproach)
    }
}

/// What the camera reports about the target marker: bearing relative to the
/// rover's nose (positive = right) and range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BeaconObservation {
    pub bearing_deg: f64,
    pub range_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutonomyConfig {
    pub align_tolerance_deg: f64,
    /// Degrees of steering per degree of heading error.
    pub steer_gain: f64,
    pub cruise_throttle: f64,
    pub approach_throttle: f64,
    /// Differential throttle used to turn in place at large heading errors.
    pub spin_throttle: f64,
    /// GPS distance at which guidance hands over to the beacon.
    pub vision_radius_m: f64,
    /// Beacon range that counts as "reached".
    pub arrival_radius_m: f64,
    /// Heading error beyond which traversal falls back to aligning in place.
    pub realign_threshold_deg: f64,
    /// Consecutive ticks without a fix before faulting.
    pub no_fix_limit: u32,
    pub max_steer_deg: f64,
    pub earth: EarthModel,
}

impl Default for AutonomyConfig {
    fn default() -> Self {
        Self {
            align_tolerance_deg: 10.0,
            steer_gain: 0.5,
            cruise_throttle: 0.6,
            approach_throttle: 0.4,
            spin_throttle: 0.5,
            vision_radius_m: 3.5,
            arrival_radius_m: 1.0,
            realign_threshold_deg: 60.0,
            no_fix_limit: 40,
            max_steer_deg: 35.0,
            earth: EarthModel::default(),
        }
    }
}

/// Compact view of the autonomy state for telemetry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AutonomyStatus {
    pub tag: AutonomyTag,
    pub waypoint_index: usize,
    pub waypoint_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fault_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutonomyState {
    tag: AutonomyTag,
    waypoints: Vec<GeoPoint>,
    current_index: usize,
    fault_reason: Option<String>,
    no_fix_ticks: u32,
    phase_elapsed_ms: u64,
}

impl Default for AutonomyState {
    fn default() -> Self {
        Self::new()
    }
}

impl AutonomyState {
    pub fn new() -> Self {
        Self {
            tag: AutonomyTag::Idle,
            waypoints: Vec::new(),
            current_index: 0,
            fault_reason: None,
            no_fix_ticks: 0,
            phase_elapsed_ms: 0,
        }
    }

    pub fn tag(&self) -> AutonomyTag {
        self.tag
    }

    pub fn waypoints(&self) -> &[GeoPoint] {
        &self.waypoints
    }

    pub fn current_index(&self) -> usize {
        self.current_index
    }

    pub fn current_waypoint(&self) -> Option<GeoPoint> {
        self.waypoints.get(self.current_index).copied()
    }

    pub fn fault_reason(&self) -> Option<&str> {
        self.fault_reason.as_deref()
    }

    pub fn is_active(&self) -> bool {
        self.tag.is_active()
    }

    /// Time spent in the current phase.
    pub fn phase_elapsed_ms(&self) -> u64 {
        self.phase_elapsed_ms
    }

    pub fn status(&self) -> AutonomyStatus {
        AutonomyStatus {
            tag: self.tag,
            waypoint_index: self.current_index,
            waypoint_count: self.waypoints.len(),
            fault_reason: self.fault_reason.clone(),
        }
    }

    fn enter(&mut self, tag: AutonomyTag) {
        self.tag = tag;
        self.phase_elapsed_ms = 0;
        if tag != AutonomyTag::Fault {
            self.fault_reason = None;
        }
    }

    /// Replaces the course. Refused while a traversal is running.
    pub fn set_waypoints(&mut self, points: Vec<GeoPoint>) -> bool {
        if self.is_active() {
            return false;
        }
        self.waypoints = points;
        self.current_index = 0;
        self.no_fix_ticks = 0;
        self.enter(AutonomyTag::Idle);
        true
    }

    /// Starts (or resumes after a fault) the traversal. An arrived course
    /// restarts from the first waypoint.
    pub fn start(&mut self) -> bool {
        if self.is_active() || self.waypoints.is_empty() {
            return false;
        }
        if matches!(self.tag, AutonomyTag::Arrived | AutonomyTag::Idle) {
            self.current_index = 0;
        }
        self.no_fix_ticks = 0;
        self.enter(AutonomyTag::AlignHeading);
        true
    }

    pub fn abort(&mut self) {
        if self.tag != AutonomyTag::Idle {
            self.enter(AutonomyTag::Idle);
        }
    }

    /// Drops an active traversal into `Fault`; inactive states are untouched.
    pub fn fault(&mut self, reason: &str) {
        if self.is_active() {
            self.enter(AutonomyTag::Fault);
            self.fault_reason = Some(reason.to_string());
        }
    }
}

fn spin_toward(cfg: &AutonomyConfig, error_deg: f64) -> DriveState {
    // ease off close to the target heading so we don't overshoot the tolerance
    let scale = (error_deg.abs() / 30.0).clamp(0.3, 1.0);
    let rate = cfg.spin_throttle * scale * error_deg.signum();
    DriveState::spin(rate, clamp_steer(cfg.steer_gain * error_deg, cfg.max_steer_deg))
}

fn steer_toward(cfg: &AutonomyConfig, throttle: f64, error_deg: f64) -> DriveState {
    DriveState::uniform(throttle, clamp_steer(cfg.steer_gain * error_deg, cfg.max_steer_deg))
}

/// Advances the traversal by one control tick and returns the actuator command.
///
/// Inactive states always command a stop. A tick without a usable fix holds
/// position; `no_fix_limit` such ticks in a row fault the traversal.
pub fn run_autonomy_step(
    state: &mut AutonomyState,
    cfg: &AutonomyConfig,
    fix: &GpsFix,
    heading: HeadingDeg,
    beacon: Option<BeaconObservation>,
    dt_ms: u64,
) -> DriveState {
    if !state.is_active() {
        return DriveState::stopped();
    }
    state.phase_elapsed_ms += dt_ms;

    let Some(position) = fix.position() else {
        state.no_fix_ticks += 1;
        if state.no_fix_ticks >= cfg.no_fix_limit {
            state.fault("gps fix lost");
        }
        return DriveState::stopped();
    };
    state.no_fix_ticks = 0;

    let Some(target) = state.current_waypoint() else {
        // unreachable through the public API, but never index out of bounds
        state.fault("waypoint index out of range");
        return DriveState::stopped();
    };
    let distance = haversine_distance(position, target, cfg.earth);
    let error = match initial_bearing(position, target) {
        Ok(bearing) => angular_difference(heading, bearing),
        // sitting on the waypoint: keep the current heading
        Err(_) => 0.0,
    };

    match state.tag {
        AutonomyTag::AlignHeading => {
            if error.abs() < cfg.align_tolerance_deg {
                state.enter(AutonomyTag::TraverseGps);
                steer_toward(cfg, cfg.cruise_throttle, error)
            } else {
                spin_toward(cfg, error)
            }
        }
        AutonomyTag::TraverseGps => {
            if distance <= cfg.vision_radius_m {
                // hand over only once the camera confirms the marker; until
                // then creep along the GPS bearing, which is noisy this close
                if beacon.is_some() {
                    state.enter(AutonomyTag::VisionApproach);
                }
                approach(state, cfg, error, beacon)
            } else if error.abs() > cfg.realign_threshold_deg {
                state.enter(AutonomyTag::AlignHeading);
                spin_toward(cfg, error)
            } else {
                steer_toward(cfg, cfg.cruise_throttle, error)
            }
        }
        AutonomyTag::VisionApproach => approach(state, cfg, error, beacon),
        AutonomyTag::Idle | AutonomyTag::Arrived | AutonomyTag::Fault => DriveState::stopped(),
    }
}

/// Vision phase: home on the beacon when it is in view, otherwise creep along
/// the GPS bearing until it shows up.
fn approach(
    state: &mut AutonomyState,
    cfg: &AutonomyConfig,
    gps_error_deg: f64,
    beacon: Option<BeaconObservation>,
) -> DriveState {
    // beyond this the turning circle can orbit the target, so turn in place
    const SPIN_ABOVE_DEG: f64 = 45.0;

    let error = match beacon {
        Some(b) if b.range_m <= cfg.arrival_radius_m => {
            state.current_index += 1;
            if state.current_index >= state.waypoints.len() {
                state.current_index = state.waypoints.len();
                state.enter(AutonomyTag::Arrived);
            } else {
                state.enter(AutonomyTag::AlignHeading);
            }
            return DriveState::stopped();
        }
        Some(b) => b.bearing_deg,
        None => gps_error_deg,
    };
    if error.abs() > SPIN_ABOVE_DEG {
        spin_toward(cfg, error)
    } else {
        steer_toward(cfg, cfg.approach_throttle, error)
    }
}
