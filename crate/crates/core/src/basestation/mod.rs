//! Operator side: key mapping, map projection, mission log, trail export and
//! the bridge that feeds consoles.

pub mod bridge;
pub mod keys;
pub mod log;
pub mod map;
pub mod trail;

pub use bridge::{Bridge, BridgeConfig, BridgeError, ConnectionStatus, ConsoleEvent, OperatorCommand};
pub use keys::{drive_command_from_keys, parse_keys, Key, KeySet};
pub use log::{LogEvent, LogRecord, MissionLog};
pub use map::{project_to_map, Canvas, GeoBounds, MapView};
pub use trail::{export_trail, read_trail_csv, TrailExport, TrailOptions, TrailPoint};
