use serde::{Deserialize, Serialize};

use crate::nmea::GpsFix;

use super::autonomy::AutonomyStatus;
use super::orientation::Orientation;
use super::power::BusReading;

/// Raw environmental readings from the sensor box. `None` means the sensor
/// did not answer this cycle.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SensorReadings {
    pub co2_ppm: Option<f64>,
    pub co_ppm: Option<f64>,
    pub air_temp_c: Option<f64>,
    pub humidity_pct: Option<f64>,
    pub soil_temp_c: Option<f64>,
    pub soil_moisture: Option<f64>,
}

/// One timestamped aggregation of everything the rover reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TelemetrySnapshot {
    pub t: u64,
    pub co2_ppm: Option<f64>,
    pub co_ppm: Option<f64>,
    pub air_temp_c: Option<f64>,
    pub humidity_pct: Option<f64>,
    pub soil_temp_c: Option<f64>,
    pub soil_moisture: Option<f64>,
    pub orientation: Orientation,
    pub fix: GpsFix,
    pub autonomy: AutonomyStatus,
    pub power: Vec<BusReading>,
    pub estopped: bool,
    pub arm_overload: bool,
    /// Video is carried out of band; this only says whether a feed exists.
    pub camera_online: bool,
}

fn finite_in(value: Option<f64>, lo: f64, hi: f64) -> Option<f64> {
    value.filter(|v| v.is_finite() && (lo..=hi).contains(v))
}

/// Readings outside the physical span of a channel are dropped, never clamped.
pub fn sanitize(readings: &SensorReadings) -> SensorReadings {
    SensorReadings {
        co2_ppm: finite_in(readings.co2_ppm, 0.0, f64::MAX),
        co_ppm: finite_in(readings.co_ppm, 0.0, f64::MAX),
        air_temp_c: finite_in(readings.air_temp_c, -273.15, f64::MAX),
        humidity_pct: finite_in(readings.humidity_pct, 0.0, 100.0),
        soil_temp_c: finite_in(readings.soil_temp_c, -273.15, f64::MAX),
        soil_moisture: finite_in(readings.soil_moisture, 0.0, 1.0),
    }
}
