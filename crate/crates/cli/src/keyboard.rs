//! Line-oriented operator input for terminals without a browser console.
//!
//! ```text
//! wd            hold W and D (released automatically after a short hold)
//! <empty line>  release all keys
//! x | estop     emergency stop
//! clear         clear the e-stop
//! wp LAT LON    append a waypoint
//! start | abort autonomy
//! drill | sensors | biomass | capillary
//! q | quit
//! ```

use rover_core::basestation::{Key, OperatorCommand};
use rover_core::protocol::message::ScienceAction;
use rover_core::GeoPoint;

#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Command(OperatorCommand),
    Quit,
}

pub fn parse_line(line: &str) -> Result<Input, String> {
    let line = line.trim();
    let mut words = line.split_whitespace();
    let Some(head) = words.next() else {
        return Ok(Input::Command(OperatorCommand::Keys { keys: Vec::new() }));
    };
    let cmd = match head.to_ascii_lowercase().as_str() {
        "q" | "quit" | "exit" => return Ok(Input::Quit),
        "x" | "estop" | "stop" => OperatorCommand::EStop,
        "clear" => OperatorCommand::ClearEStop,
        "start" => OperatorCommand::StartAutonomy,
        "abort" => OperatorCommand::AbortAutonomy,
        "drill" => OperatorCommand::Science { action: ScienceAction::Drill },
        "sensors" => OperatorCommand::Science { action: ScienceAction::ReadSensors },
        "biomass" => OperatorCommand::Science { action: ScienceAction::RunBiomass },
        "capillary" => OperatorCommand::Science { action: ScienceAction::RunCapillary },
        "wp" => {
            let mut num = || words.next().and_then(|w| w.parse::<f64>().ok()).ok_or("usage: wp LAT LON");
            let (lat, lon) = (num()?, num()?);
            let point = GeoPoint::new(lat, lon).map_err(|e| e.to_string())?;
            OperatorCommand::AppendWaypoint { point }
        }
        keys => {
            let parsed: Option<Vec<Key>> = keys.chars().map(|c| c.to_string().parse().ok()).collect();
            match parsed {
                Some(mut keys) if words.next().is_none() => {
                    keys.sort();
                    keys.dedup();
                    OperatorCommand::Keys { keys }
                }
                _ => return Err(format!("unknown input `{line}`")),
            }
        }
    };
    if words.next().is_some() {
        return Err(format!("unexpected trailing input in `{line}`"));
    }
    Ok(Input::Command(cmd))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_and_commands() {
        assert_eq!(parse_line("dwW").unwrap(), Input::Command(OperatorCommand::Keys { keys: vec![Key::W, Key::D] }));
        assert_eq!(parse_line("  ").unwrap(), Input::Command(OperatorCommand::Keys { keys: vec![] }));
        assert_eq!(parse_line("X").unwrap(), Input::Command(OperatorCommand::EStop));
        assert_eq!(parse_line("quit").unwrap(), Input::Quit);
        let Input::Command(OperatorCommand::AppendWaypoint { point }) = parse_line("wp 23.5 90.25").unwrap() else {
            panic!("expected a waypoint");
        };
        assert_eq!((point.lat(), point.lon()), (23.5, 90.25));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_line("wq").is_err());
        assert!(parse_line("wp 95 0").is_err());
        assert!(parse_line("wp 1").is_err());
        assert!(parse_line("start now").is_err());
    }
}
