//! Append-only mission log, stored as newline-delimited JSON.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::onboard::telemetry::TelemetrySnapshot;
use crate::protocol::message::Message;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum LogEvent {
    CommandSent { seq: u64, message: Message },
    Ack { seq: u64, accepted: bool },
    Telemetry { snapshot: Box<TelemetrySnapshot> },
    Session { connected: bool, reason: Option<String> },
    Rejected { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LogRecord {
    /// Microseconds on the base-station clock.
    pub t_us: u64,
    pub event: LogEvent,
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("line {line}: timestamp {t_us} not after the previous record")]
    NotIncreasing { line: usize, t_us: u64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Records are never edited once appended and timestamps strictly increase.
/// A record stamped at or before its predecessor is nudged one microsecond
/// past it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MissionLog {
    records: Vec<LogRecord>,
}

impl MissionLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn append(&mut self, t_us: u64, event: LogEvent) -> &LogRecord {
        let t_us = match self.records.last() {
            Some(last) if t_us <= last.t_us => last.t_us + 1,
            _ => t_us,
        };
        self.records.push(LogRecord { t_us, event });
        self.records.last().expect("just pushed")
    }

    pub fn records(&self) -> &[LogRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// The last `n` records.
    pub fn tail(&self, n: usize) -> &[LogRecord] {
        &self.records[self.records.len().saturating_sub(n)..]
    }

    pub fn write_ndjson<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for r in &self.records {
            out.write_all(ndjson_line(r).as_bytes())?;
        }
        out.flush()
    }

    pub fn read_ndjson<R: BufRead>(input: R) -> Result<Self, LogError> {
        let mut records: Vec<LogRecord> = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let r: LogRecord = serde_json::from_str(&line).map_err(|source| LogError::Json { line: i + 1, source })?;
            if records.last().is_some_and(|last| r.t_us <= last.t_us) {
                return Err(LogError::NotIncreasing { line: i + 1, t_us: r.t_us });
            }
            records.push(r);
        }
        Ok(Self { records })
    }
}

pub fn ndjson_line(record: &LogRecord) -> String {
    let mut s = serde_json::to_string(record).expect("log records always serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamps_strictly_increase() {
        let mut log = MissionLog::new();
        log.append(10, LogEvent::Rejected { reason: "a".into() });
        log.append(10, LogEvent::Rejected { reason: "b".into() });
        log.append(5, LogEvent::Rejected { reason: "c".into() });
        let ts: Vec<u64> = log.records().iter().map(|r| r.t_us).collect();
        assert_eq!(ts, vec![10, 11, 12]);
        assert_eq!(log.tail(2).len(), 2);
        assert_eq!(log.tail(10).len(), 3);
    }

    #[test]
    fn ndjson_round_trip() {
        let mut log = MissionLog::new();
        log.append(1, LogEvent::CommandSent { seq: 1, message: Message::EStop });
        log.append(2, LogEvent::Ack { seq: 1, accepted: true });
        log.append(3, LogEvent::Session { connected: false, reason: Some("timeout".into()) });
        let mut buf = Vec::new();
        log.write_ndjson(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with(r#"{"tUs":1,"event":{"type":"commandSent","seq":1,"message":{"type":"estop"}}}"#));
        assert_eq!(MissionLog::read_ndjson(&buf[..]).unwrap(), log);
    }

    #[test]
    fn reading_rejects_out_of_order() {
        let text = "{\"tUs\":5,\"event\":{\"type\":\"rejected\",\"reason\":\"x\"}}\n{\"tUs\":5,\"event\":{\"type\":\"rejected\",\"reason\":\"y\"}}\n";
        assert!(matches!(MissionLog::read_ndjson(text.as_bytes()), Err(LogError::NotIncreasing { line: 2, .. })));
    }
}
