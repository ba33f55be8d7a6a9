//! Soil analysis arithmetic: pH habitability band, volatile (biomass)
//! fraction from heating loss, and capillary-rise classification.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PH_LIFE_BAND: (f64, f64) = (6.5, 9.0);
/// Samples shallower than this may be surface-weathered.
pub const MIN_SAMPLE_DEPTH_CM: f64 = 10.0;
pub const MARS_SURFACE_DOSE_MSV_PER_DAY: f64 = 0.67;
pub const MARS_GRAVITY_FRACTION: f64 = 0.375;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScienceError {
    #[error("pH {0} outside the 0-14 scale")]
    OutOfScale(f64),
    #[error("mass before heating must be positive, got {0} g")]
    NonPositiveMass(f64),
    #[error("mass after heating must be non-negative, got {0} g")]
    NegativeMass(f64),
    #[error("sample gained mass on heating ({before} g -> {after} g)")]
    MassGain { before: f64, after: f64 },
    #[error("capillary rise must be a non-negative rate, got {0}")]
    BadRate(f64),
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("row {row}: {source}")]
    Csv { row: usize, source: csv::Error },
    #[error("row {row}: {source}")]
    Sample { row: usize, source: ScienceError },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Inclusive band.
pub fn ph_habitable(ph: f64) -> Result<bool, ScienceError> {
    if !(0.0..=14.0).contains(&ph) {
        return Err(ScienceError::OutOfScale(ph));
    }
    Ok((PH_LIFE_BAND.0..=PH_LIFE_BAND.1).contains(&ph))
}

/// Share of the sample mass driven off by heating.
pub fn biomass_fraction(mass_before_g: f64, mass_after_g: f64) -> Result<f64, ScienceError> {
    if !(mass_before_g > 0.0) || !mass_before_g.is_finite() {
        return Err(ScienceError::NonPositiveMass(mass_before_g));
    }
    if !(mass_after_g >= 0.0) || !mass_after_g.is_finite() {
        return Err(ScienceError::NegativeMass(mass_after_g));
    }
    if mass_after_g > mass_before_g {
        return Err(ScienceError::MassGain { before: mass_before_g, after: mass_after_g });
    }
    Ok((mass_before_g - mass_after_g) / mass_before_g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CapillaryClass {
    Low,
    Medium,
    High,
    Unknown,
}

/// Rise-rate class edges in mm/min: Low below `medium_from`, High from `high_from`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapillaryThresholds {
    pub medium_from: f64,
    pub high_from: f64,
}

impl Default for CapillaryThresholds {
    fn default() -> Self {
        Self { medium_from: 1.0, high_from: 5.0 }
    }
}

pub fn classify_capillary(rate_mm_per_min: Option<f64>, t: &CapillaryThresholds) -> Result<CapillaryClass, ScienceError> {
    let Some(rate) = rate_mm_per_min else {
        return Ok(CapillaryClass::Unknown);
    };
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(ScienceError::BadRate(rate));
    }
    Ok(if rate < t.medium_from {
        CapillaryClass::Low
    } else if rate < t.high_from {
        CapillaryClass::Medium
    } else {
        CapillaryClass::High
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoilSample {
    #[serde(default)]
    pub id: Option<String>,
    pub depth_cm: f64,
    pub ph: f64,
    pub mass_before_g: f64,
    pub mass_after_g: f64,
    #[serde(default)]
    pub capillary_rise_mm_per_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HabitabilityReport {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub id: Option<String>,
    pub ph_in_life_band: bool,
    pub volatile_fraction: f64,
    pub capillary_class: CapillaryClass,
    pub notes: String,
}

pub fn analyze(sample: &SoilSample) -> Result<HabitabilityReport, ScienceError> {
    analyze_with(sample, &CapillaryThresholds::default())
}

pub fn analyze_with(sample: &SoilSample, thresholds: &CapillaryThresholds) -> Result<HabitabilityReport, ScienceError> {
    let ph_in_life_band = ph_habitable(sample.ph)?;
    let volatile_fraction = biomass_fraction(sample.mass_before_g, sample.mass_after_g)?;
    let capillary_class = classify_capillary(sample.capillary_rise_mm_per_min, thresholds)?;

    let mut notes = Vec::new();
    if sample.depth_cm < MIN_SAMPLE_DEPTH_CM {
        notes.push(format!("shallow sample ({} cm); subsurface soil is taken from below {MIN_SAMPLE_DEPTH_CM} cm", sample.depth_cm));
    }
    notes.push(format!(
        "Mars context: surface radiation about {MARS_SURFACE_DOSE_MSV_PER_DAY} mSv/day, gravity {}% of Earth",
        MARS_GRAVITY_FRACTION * 100.0
    ));
    Ok(HabitabilityReport { id: sample.id.clone(), ph_in_life_band, volatile_fraction, capillary_class, notes: notes.join("; ") })
}

/// Reads samples from CSV with a header row naming the [`SoilSample`] fields.
/// An empty `capillary_rise_mm_per_min` cell means the test was not run.
pub fn read_samples<R: Read>(input: R) -> Result<Vec<SoilSample>, IngestError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    reader
        .deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|source| IngestError::Csv { row: i + 1, source }))
        .collect()
}

/// Analyzes every sample, writing one JSON report per line. Stops at the
/// first invalid sample.
pub fn analyze_csv<R: Read, W: Write>(input: R, mut out: W) -> Result<usize, IngestError> {
    let samples = read_samples(input)?;
    for (i, s) in samples.iter().enumerate() {
        let report = analyze(s).map_err(|source| IngestError::Sample { row: i + 1, source })?;
        serde_json::to_writer(&mut out, &report).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(samples.len())
}
