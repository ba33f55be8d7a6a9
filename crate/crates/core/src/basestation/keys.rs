use std::collections::BTreeSet;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::onboard::drive::MAX_STEER_DEG;
use crate::protocol::message::Message;

/// Operator drive keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Key {
    W,
    A,
    S,
    D,
}

impl FromStr for Key {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "w" | "W" => Ok(Key::W),
            "a" | "A" => Ok(Key::A),
            "s" | "S" => Ok(Key::S),
            "d" | "D" => Ok(Key::D),
            _ => Err(()),
        }
    }
}

pub type KeySet = BTreeSet<Key>;

/// Parses key tokens; anything that is not W/A/S/D is ignored.
pub fn parse_keys<'a>(tokens: impl IntoIterator<Item = &'a str>) -> KeySet {
    tokens.into_iter().filter_map(|t| t.parse().ok()).collect()
}

/// W/S give full forward/reverse, A/D full left/right steering; opposing keys
/// cancel. With nothing pressed the command is a dead stop.
pub fn drive_command_from_keys(pressed: &KeySet) -> Message {
    let axis = |pos: Key, neg: Key| match (pressed.contains(&pos), pressed.contains(&neg)) {
        (true, false) => 1.0,
        (false, true) => -1.0,
        _ => 0.0,
    };
    Message::Drive { throttle: axis(Key::W, Key::S), steer_deg: MAX_STEER_DEG * axis(Key::D, Key::A) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keys(s: &str) -> KeySet {
        parse_keys(s.split(','))
    }

    #[test]
    fn mapping() {
        assert_eq!(drive_command_from_keys(&keys("W")), Message::Drive { throttle: 1.0, steer_deg: 0.0 });
        assert_eq!(drive_command_from_keys(&keys("W,D")), Message::Drive { throttle: 1.0, steer_deg: 35.0 });
        assert_eq!(drive_command_from_keys(&keys("s,a")), Message::Drive { throttle: -1.0, steer_deg: -35.0 });
        assert_eq!(drive_command_from_keys(&KeySet::new()), Message::Drive { throttle: 0.0, steer_deg: 0.0 });
        assert_eq!(drive_command_from_keys(&keys("W,S,A,D")), Message::Drive { throttle: 0.0, steer_deg: 0.0 });
        assert_eq!(keys("q, W ,x"), keys("W"));
    }
}
