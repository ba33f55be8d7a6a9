//! `key = value` configuration for the onboard controller.
//!
//! ```text
//! # comments start with '#'
//! control_port = 7401
//! cruise_throttle = 0.6
//! power.drive.packs = 10000@11.1, 10000@11.1
//! power.drive.series = true
//! power.comms.taps = 12, 5
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::geodesy::EarthModel;
use crate::protocol::net::{DEFAULT_CONTROL_PORT, DEFAULT_TELEMETRY_PORT};
use crate::protocol::session::SessionConfig;

use super::autonomy::AutonomyConfig;
use super::drive::MAX_STEER_DEG;
use super::orientation::ComplementaryFilter;
use super::power::{default_sections, Pack, PowerError, PowerSection, SectionId};

pub const CONFIG_ENV_VAR: &str = "ROVER_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {value:?}")]
    BadValue { key: String, value: String },
    #[error(transparent)]
    Power(#[from] PowerError),
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Current draw model used to drain the batteries each tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadModel {
    pub drive_idle_a: f64,
    /// Six wheel motors at full throttle.
    pub drive_full_a: f64,
    pub arm_idle_a: f64,
    pub arm_per_kg_a: f64,
    pub compute_a: f64,
    pub comms_a: f64,
}

impl Default for LoadModel {
    fn default() -> Self {
        Self { drive_idle_a: 0.5, drive_full_a: 66.0, arm_idle_a: 0.95, arm_per_kg_a: 1.0, compute_a: 2.5, comms_a: 1.5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    pub control_port: u16,
    pub telemetry_port: u16,
    pub session: SessionConfig,
    pub tick_ms: u64,
    /// Telemetry is emitted every this many control ticks.
    pub telemetry_every_ticks: u32,
    pub autonomy: AutonomyConfig,
    pub filter: ComplementaryFilter,
    pub power: Vec<PowerSection>,
    pub loads: LoadModel,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            control_port: DEFAULT_CONTROL_PORT,
            telemetry_port: DEFAULT_TELEMETRY_PORT,
            session: SessionConfig::default(),
            tick_ms: 50,
            telemetry_every_ticks: 4,
            autonomy: AutonomyConfig::default(),
            filter: ComplementaryFilter::default(),
            power: default_sections(),
            loads: LoadModel::default(),
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue { key: key.to_string(), value: value.to_string() })
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse_value(key, s)).collect()
}

#[derive(Default)]
struct SectionSpec {
    packs: Option<Vec<Pack>>,
    series: Option<bool>,
    taps: Option<Vec<f64>>,
}

fn section_id(name: &str) -> Option<SectionId> {
    match name {
        "drive" => Some(SectionId::Drive),
        "compute" => Some(SectionId::Compute),
        "comms" => Some(SectionId::Comms),
        _ => None,
    }
}

/// `capacity_mah@volts`
fn parse_pack(key: &str, s: &str) -> Result<Pack, ConfigError> {
    let bad = || ConfigError::BadValue { key: key.to_string(), value: s.to_string() };
    let (cap, volts) = s.split_once('@').ok_or_else(bad)?;
    Ok(Pack::full(cap.trim().parse().map_err(|_| bad())?, volts.trim().parse().map_err(|_| bad())?))
}

impl ControllerConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut sections: BTreeMap<SectionId, SectionSpec> = BTreeMap::new();

        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            let (key, value) = (key.trim(), value.trim());
            let a = &mut cfg.autonomy;
            match key {
                "control_port" => cfg.control_port = parse_value(key, value)?,
                "telemetry_port" => cfg.telemetry_port = parse_value(key, value)?,
                "heartbeat_interval_ms" => cfg.session.heartbeat_interval_ms = parse_value(key, value)?,
                "watchdog_ms" => cfg.session.watchdog_ms = parse_value(key, value)?,
                "tick_ms" => cfg.tick_ms = parse_value(key, value)?,
                "telemetry_every_ticks" => cfg.telemetry_every_ticks = parse_value(key, value)?,
                "align_tolerance_deg" => a.align_tolerance_deg = parse_value(key, value)?,
                "steer_gain" => a.steer_gain = parse_value(key, value)?,
                "cruise_throttle" => a.cruise_throttle = parse_value(key, value)?,
                "approach_throttle" => a.approach_throttle = parse_value(key, value)?,
                "spin_throttle" => a.spin_throttle = parse_value(key, value)?,
                "vision_radius_m" => a.vision_radius_m = parse_value(key, value)?,
                "arrival_radius_m" => a.arrival_radius_m = parse_value(key, value)?,
                "realign_threshold_deg" => a.realign_threshold_deg = parse_value(key, value)?,
                "no_fix_limit" => a.no_fix_limit = parse_value(key, value)?,
                "max_steer_deg" => {
                    let v: f64 = parse_value(key, value)?;
                    if !(0.0..=MAX_STEER_DEG).contains(&v) {
                        return Err(ConfigError::BadValue { key: key.into(), value: value.into() });
                    }
                    a.max_steer_deg = v;
                }
                "earth_radius_m" => {
                    a.earth = EarthModel::new(parse_value(key, value)?)
                        .map_err(|_| ConfigError::BadValue { key: key.into(), value: value.into() })?
                }
                "orientation_time_constant_s" => cfg.filter.time_constant_s = parse_value(key, value)?,
                "load.drive_idle_a" => cfg.loads.drive_idle_a = parse_value(key, value)?,
                "load.drive_full_a" => cfg.loads.drive_full_a = parse_value(key, value)?,
                "load.arm_idle_a" => cfg.loads.arm_idle_a = parse_value(key, value)?,
                "load.arm_per_kg_a" => cfg.loads.arm_per_kg_a = parse_value(key, value)?,
                "load.compute_a" => cfg.loads.compute_a = parse_value(key, value)?,
                "load.comms_a" => cfg.loads.comms_a = parse_value(key, value)?,
                _ => {
                    let parts: Vec<&str> = key.split('.').collect();
                    let (Some(id), [_, _, field]) = (parts.get(1).and_then(|n| section_id(n)), parts.as_slice()) else {
                        return Err(ConfigError::UnknownKey(key.to_string()));
                    };
                    if parts[0] != "power" {
                        return Err(ConfigError::UnknownKey(key.to_string()));
                    }
                    let spec = sections.entry(id).or_default();
                    match *field {
                        "packs" => {
                            spec.packs = Some(
                                value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse_pack(key, s)).collect::<Result<_, _>>()?,
                            )
                        }
                        "series" => spec.series = Some(parse_value(key, value)?),
                        "taps" => spec.taps = Some(parse_list(key, value)?),
                        _ => return Err(ConfigError::UnknownKey(key.to_string())),
                    }
                }
            }
        }

        for (id, spec) in sections {
            let slot = cfg.power.iter_mut().find(|s| s.id() == id).expect("defaults cover every section");
            let packs = spec.packs.unwrap_or_else(|| slot.packs().to_vec());
            let series = spec.series.unwrap_or(slot.is_series());
            let taps = spec.taps.unwrap_or_else(|| slot.taps_v().to_vec());
            *slot = PowerSection::new(id, packs, series, taps)?;
        }
        if cfg.tick_ms == 0 {
            return Err(ConfigError::BadValue { key: "tick_ms".into(), value: "0".into() });
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    /// `ROVER_CONFIG` wins over `path`; with neither, defaults apply.
    pub fn resolve(path: Option<&Path>) -> Result<Self, ConfigError> {
        let from_env = std::env::var_os(CONFIG_ENV_VAR).map(PathBuf::from);
        match from_env.as_deref().or(path) {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_is_defaults() {
        assert_eq!(ControllerConfig::parse("# nothing\n\n").unwrap(), ControllerConfig::default());
    }

    #[test]
    fn overrides_scalars_and_sections() {
        let cfg = ControllerConfig::parse(
            "control_port = 9000\ncruise_throttle=0.5 # slower\npower.compute.packs = 2200@7.4, 2200@7.4\npower.compute.series = true\npower.compute.taps = 5\n",
        )
        .unwrap();
        assert_eq!(cfg.control_port, 9000);
        assert_eq!(cfg.autonomy.cruise_throttle, 0.5);
        let compute = cfg.power.iter().find(|s| s.id() == SectionId::Compute).unwrap();
        assert_eq!(compute.bus_v(), 14.8);
        assert_eq!(compute.taps_v(), &[5.0]);
    }

    #[test]
    fn errors() {
        assert!(matches!(ControllerConfig::parse("nonsense"), Err(ConfigError::Syntax { line: 1 })));
        assert!(matches!(ControllerConfig::parse("warp = 9"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(ControllerConfig::parse("power.drive.color = red"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(ControllerConfig::parse("control_port = -1"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(ControllerConfig::parse("max_steer_deg = 40"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(ControllerConfig::parse("power.drive.packs = 10000"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(ControllerConfig::parse("power.drive.packs ="), Err(ConfigError::Power(_))));
    }

    #[test]
    fn load_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rover.conf");
        std::fs::write(&path, "watchdog_ms = 1500\n").unwrap();
        assert_eq!(ControllerConfig::load(&path).unwrap().session.watchdog_ms, 1500);
        assert!(matches!(ControllerConfig::load(&dir.path().join("missing")), Err(ConfigError::Io { .. })));
    }
}
