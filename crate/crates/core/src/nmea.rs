//! NMEA 0183 sentence parsing and GGA encoding.
//!
//! Only GGA and RMC are interpreted as positions. Any other sentence kind is
//! still checksum-validated and carried through as [`SentenceKind::Other`].

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geodesy::GeoPoint;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NmeaError {
    #[error("malformed sentence: {0}")]
    Malformed(&'static str),
    #[error("checksum mismatch: computed {computed:02X}, sentence says {stated:02X}")]
    BadChecksum { computed: u8, stated: u8 },
    #[error("sentence kind {0} carries no position")]
    NotPositional(String),
    #[error("invalid {field} field: {value:?}")]
    InvalidField { field: &'static str, value: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SentenceKind {
    Gga,
    Rmc,
    Other(String),
}

impl SentenceKind {
    fn from_tag(tag: &str) -> Self {
        match tag {
            "GGA" => Self::Gga,
            "RMC" => Self::Rmc,
            other => Self::Other(other.to_string()),
        }
    }

    pub fn tag(&self) -> &str {
        match self {
            Self::Gga => "GGA",
            Self::Rmc => "RMC",
            Self::Other(tag) => tag,
        }
    }
}

/// A checksum-verified sentence split into its comma-separated fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NmeaSentence {
    pub talker: String,
    pub kind: SentenceKind,
    /// Data fields after the address field, verbatim.
    pub fields: Vec<String>,
    pub checksum: u8,
}

impl NmeaSentence {
    /// Builds a sentence and computes its checksum.
    pub fn new(talker: &str, kind: SentenceKind, fields: Vec<String>) -> Self {
        let mut s = Self { talker: talker.to_string(), kind, fields, checksum: 0 };
        s.checksum = checksum(s.body().as_bytes());
        s
    }

    /// The bytes between `$` and `*`.
    pub fn body(&self) -> String {
        let mut body = format!("{}{}", self.talker, self.kind.tag());
        for f in &self.fields {
            body.push(',');
            body.push_str(f);
        }
        body
    }

    /// Wire form, always terminated by CRLF.
    pub fn to_line(&self) -> String {
        format!("${}*{:02X}\r\n", self.body(), self.checksum)
    }

    fn field(&self, idx: usize) -> &str {
        self.fields.get(idx).map(String::as_str).unwrap_or("")
    }
}

impl fmt::Display for NmeaSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "${}*{:02X}", self.body(), self.checksum)
    }
}

/// XOR of every byte in `body`.
pub fn checksum(body: &[u8]) -> u8 {
    body.iter().fold(0, |acc, b| acc ^ b)
}

fn hex_digit(b: u8) -> Option<u8> {
    match b {
        b'0'..=b'9' => Some(b - b'0'),
        b'A'..=b'F' => Some(b - b'A' + 10),
        b'a'..=b'f' => Some(b - b'a' + 10),
        _ => None,
    }
}

/// Parses one sentence. A trailing CRLF (or bare LF) is optional.
pub fn parse_sentence(line: &[u8]) -> Result<NmeaSentence, NmeaError> {
    let line = line
        .strip_suffix(b"\r\n")
        .or_else(|| line.strip_suffix(b"\n"))
        .unwrap_or(line);
    if line.is_empty() {
        return Err(NmeaError::Malformed("empty input"));
    }
    if line[0] != b'$' {
        return Err(NmeaError::Malformed("missing '$'"));
    }
    if !line.iter().all(|b| (0x20..0x7f).contains(b)) {
        return Err(NmeaError::Malformed("non-printable or non-ASCII byte"));
    }
    let star = line
        .iter()
        .rposition(|&b| b == b'*')
        .ok_or(NmeaError::Malformed("missing '*'"))?;
    let body = &line[1..star];
    let tail = &line[star + 1..];
    if tail.len() != 2 {
        return Err(NmeaError::Malformed("checksum must be two hex digits"));
    }
    let stated = match (hex_digit(tail[0]), hex_digit(tail[1])) {
        (Some(hi), Some(lo)) => hi << 4 | lo,
        _ => return Err(NmeaError::Malformed("checksum is not hex")),
    };
    if body.contains(&b'*') || body.contains(&b'$') {
        return Err(NmeaError::Malformed("reserved character inside sentence"));
    }
    let computed = checksum(body);
    if computed != stated {
        return Err(NmeaError::BadChecksum { computed, stated });
    }

    // ASCII was verified above, so this cannot fail.
    let body = std::str::from_utf8(body).map_err(|_| NmeaError::Malformed("not UTF-8"))?;
    let mut parts = body.split(',');
    let address = parts.next().unwrap_or("");
    if address.len() < 3 || !address.bytes().all(|b| b.is_ascii_alphanumeric()) {
        return Err(NmeaError::Malformed("bad address field"));
    }
    let (talker, tag) = address.split_at(2);
    Ok(NmeaSentence {
        talker: talker.to_string(),
        kind: SentenceKind::from_tag(tag),
        fields: parts.map(str::to_string).collect(),
        checksum: stated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum FixQuality {
    NoFix,
    Fix,
    DGps,
}

/// A decoded position report. `point` is `None` exactly when there is no fix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GpsFix {
    pub point: Option<GeoPoint>,
    pub utc_time: Option<f64>,
    pub quality: FixQuality,
    pub satellites: u32,
    pub hdop: Option<f64>,
    pub altitude_m: Option<f64>,
}

impl GpsFix {
    pub fn no_fix() -> Self {
        Self { point: None, utc_time: None, quality: FixQuality::NoFix, satellites: 0, hdop: None, altitude_m: None }
    }

    /// A plain autonomous fix at `point`.
    pub fn at(point: GeoPoint) -> Self {
        Self { point: Some(point), utc_time: None, quality: FixQuality::Fix, satellites: 8, hdop: Some(1.0), altitude_m: None }
    }

    /// The trusted position, if any.
    pub fn position(&self) -> Option<GeoPoint> {
        match self.quality {
            FixQuality::NoFix => None,
            _ => self.point,
        }
    }
}

fn invalid(field: &'static str, value: &str) -> NmeaError {
    NmeaError::InvalidField { field, value: value.to_string() }
}

fn parse_opt_f64(field: &'static str, s: &str) -> Result<Option<f64>, NmeaError> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(Some)
        .ok_or_else(|| invalid(field, s))
}

/// `hhmmss.ss` to seconds of day.
fn parse_utc(s: &str) -> Result<Option<f64>, NmeaError> {
    if s.is_empty() {
        return Ok(None);
    }
    if s.len() < 6 || !s.as_bytes()[..6].iter().all(u8::is_ascii_digit) {
        return Err(invalid("utc time", s));
    }
    let hh: f64 = s[0..2].parse().map_err(|_| invalid("utc time", s))?;
    let mm: f64 = s[2..4].parse().map_err(|_| invalid("utc time", s))?;
    let ss: f64 = s[4..].parse().map_err(|_| invalid("utc time", s))?;
    if hh >= 24.0 || mm >= 60.0 || !(0.0..61.0).contains(&ss) {
        return Err(invalid("utc time", s));
    }
    Ok(Some(hh * 3600.0 + mm * 60.0 + ss))
}

/// `(d)ddmm.mmmm` plus hemisphere letter to signed decimal degrees.
fn parse_coord(
    field: &'static str,
    value: &str,
    hemi: &str,
    deg_digits: usize,
    positive: &str,
    negative: &str,
) -> Result<f64, NmeaError> {
    let dot = value.find('.').unwrap_or(value.len());
    if dot != deg_digits + 2 || !value.as_bytes()[..dot].iter().all(u8::is_ascii_digit) {
        return Err(invalid(field, value));
    }
    let degrees: f64 = value[..deg_digits].parse().map_err(|_| invalid(field, value))?;
    let minutes: f64 = value[deg_digits..].parse().map_err(|_| invalid(field, value))?;
    if !(0.0..60.0).contains(&minutes) {
        return Err(invalid(field, value));
    }
    let magnitude = degrees + minutes / 60.0;
    if hemi == positive {
        Ok(magnitude)
    } else if hemi == negative {
        Ok(-magnitude)
    } else {
        Err(invalid("hemisphere", hemi))
    }
}

fn parse_point(s: &NmeaSentence, first: usize) -> Result<GeoPoint, NmeaError> {
    let lat = parse_coord("latitude", s.field(first), s.field(first + 1), 2, "N", "S")?;
    let lon = parse_coord("longitude", s.field(first + 2), s.field(first + 3), 3, "E", "W")?;
    GeoPoint::new(lat, lon).map_err(|_| invalid("latitude", s.field(first)))
}

/// Extracts a position report from a GGA or RMC sentence. A sentence that
/// reports "no fix" yields a [`GpsFix`] with [`FixQuality::NoFix`].
pub fn to_fix(s: &NmeaSentence) -> Result<GpsFix, NmeaError> {
    match s.kind {
        SentenceKind::Gga => {
            let quality = match s.field(5) {
                "0" | "" => FixQuality::NoFix,
                "2" => FixQuality::DGps,
                q if q.len() == 1 && q.as_bytes()[0].is_ascii_digit() => FixQuality::Fix,
                q => return Err(invalid("fix quality", q)),
            };
            let utc_time = parse_utc(s.field(0))?;
            let satellites = match s.field(6) {
                "" => 0,
                n => n.parse().map_err(|_| invalid("satellites", n))?,
            };
            if quality == FixQuality::NoFix {
                return Ok(GpsFix { utc_time, satellites, ..GpsFix::no_fix() });
            }
            Ok(GpsFix {
                point: Some(parse_point(s, 1)?),
                utc_time,
                quality,
                satellites,
                hdop: parse_opt_f64("hdop", s.field(7))?,
                altitude_m: parse_opt_f64("altitude", s.field(8))?,
            })
        }
        SentenceKind::Rmc => {
            let utc_time = parse_utc(s.field(0))?;
            match s.field(1) {
                "A" => Ok(GpsFix {
                    point: Some(parse_point(s, 2)?),
                    utc_time,
                    quality: FixQuality::Fix,
                    satellites: 0,
                    hdop: None,
                    altitude_m: None,
                }),
                "V" | "" => Ok(GpsFix { utc_time, ..GpsFix::no_fix() }),
                other => Err(invalid("status", other)),
            }
        }
        SentenceKind::Other(ref tag) => Err(NmeaError::NotPositional(tag.clone())),
    }
}

/// Ten-thousandths of a minute per degree.
const UNITS_PER_DEGREE: u64 = 60 * 10_000;

fn format_coord(value: f64, deg_digits: usize, positive: char, negative: char) -> (String, String) {
    let units = (value.abs() * UNITS_PER_DEGREE as f64).round() as u64;
    let degrees = units / UNITS_PER_DEGREE;
    let minute_units = units % UNITS_PER_DEGREE;
    let text = format!(
        "{:0width$}{:02}.{:04}",
        degrees,
        minute_units / 10_000,
        minute_units % 10_000,
        width = deg_digits
    );
    let hemi = if value < 0.0 && units > 0 { negative } else { positive };
    (text, hemi.to_string())
}

fn format_utc(seconds: f64) -> String {
    let cs = (seconds.rem_euclid(86_400.0) * 100.0).round() as u64 % 8_640_000;
    let (hh, rem) = (cs / 360_000, cs % 360_000);
    let (mm, rem) = (rem / 6_000, rem % 6_000);
    format!("{:02}{:02}{:02}.{:02}", hh, mm, rem / 100, rem % 100)
}

/// Encodes a fix as a `$GPGGA` sentence with 4-decimal minutes.
pub fn encode_fix(fix: &GpsFix) -> NmeaSentence {
    let time = fix.utc_time.map(format_utc).unwrap_or_default();
    let mut fields = vec![time];
    match fix.position() {
        Some(p) => {
            let (lat, ns) = format_coord(p.lat(), 2, 'N', 'S');
            let (lon, ew) = format_coord(p.lon(), 3, 'E', 'W');
            let quality = match fix.quality {
                FixQuality::DGps => "2",
                _ => "1",
            };
            fields.extend([lat, ns, lon, ew, quality.to_string()]);
            fields.push(format!("{:02}", fix.satellites));
            fields.push(fix.hdop.map(|h| format!("{h:.1}")).unwrap_or_default());
            match fix.altitude_m {
                Some(alt) => fields.extend([format!("{alt:.1}"), "M".to_string()]),
                None => fields.extend([String::new(), String::new()]),
            }
        }
        None => {
            fields.extend(["", "", "", "", "0"].map(String::from));
            fields.push(format!("{:02}", fix.satellites));
            fields.extend(["", "", ""].map(String::from));
        }
    }
    // geoid separation, its unit, DGPS age, station id
    fields.extend(["", "", "", ""].map(String::from));
    NmeaSentence::new("GP", SentenceKind::Gga, fields)
}
