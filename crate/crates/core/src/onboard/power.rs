//! Battery packs grouped into independently fed power sections.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PowerError {
    #[error("power section {0:?} has no packs")]
    NoPacks(SectionId),
    #[error("pack in section {0:?} has non-positive capacity or voltage")]
    BadPack(SectionId),
    #[error("parallel packs in section {0:?} disagree on nominal voltage")]
    MismatchedParallel(SectionId),
    #[error("charge fraction {0} outside [0, 1]")]
    BadCharge(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SectionId {
    /// Motor drivers, wheel motors, arm actuators.
    Drive,
    /// Onboard computer and sensor box.
    Compute,
    /// Radio and cameras.
    Comms,
}

impl SectionId {
    pub const ALL: [SectionId; 3] = [SectionId::Drive, SectionId::Compute, SectionId::Comms];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Pack {
    pub capacity_mah: f64,
    pub nominal_v: f64,
    pub charge_fraction: f64,
}

impl Pack {
    pub fn full(capacity_mah: f64, nominal_v: f64) -> Self {
        Self { capacity_mah, nominal_v, charge_fraction: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PowerSection {
    id: SectionId,
    packs: Vec<Pack>,
    series: bool,
    /// Regulated outputs fed from the bus (e.g. 12 V and 5 V converters).
    taps_v: Vec<f64>,
}

impl PowerSection {
    pub fn new(id: SectionId, packs: Vec<Pack>, series: bool, taps_v: Vec<f64>) -> Result<Self, PowerError> {
        if packs.is_empty() {
            return Err(PowerError::NoPacks(id));
        }
        for p in &packs {
            if !(p.capacity_mah > 0.0 && p.nominal_v > 0.0) {
                return Err(PowerError::BadPack(id));
            }
            if !(0.0..=1.0).contains(&p.charge_fraction) {
                return Err(PowerError::BadCharge(p.charge_fraction));
            }
        }
        if !series && packs.iter().any(|p| p.nominal_v != packs[0].nominal_v) {
            return Err(PowerError::MismatchedParallel(id));
        }
        Ok(Self { id, packs, series, taps_v })
    }

    pub fn id(&self) -> SectionId {
        self.id
    }

    pub fn packs(&self) -> &[Pack] {
        &self.packs
    }

    pub fn is_series(&self) -> bool {
        self.series
    }

    pub fn taps_v(&self) -> &[f64] {
        &self.taps_v
    }

    /// Nominal bus voltage: pack voltages add in series, parallel packs share one voltage.
    pub fn bus_v(&self) -> f64 {
        if self.series {
            self.packs.iter().map(|p| p.nominal_v).sum()
        } else {
            self.packs[0].nominal_v
        }
    }

    /// Charge of the weakest pack; the section is only as full as it.
    pub fn charge_fraction(&self) -> f64 {
        self.packs.iter().map(|p| p.charge_fraction).fold(1.0, f64::min)
    }

    fn drain(&mut self, load_a: f64, dt_ms: u64) {
        let amp_hours = load_a.max(0.0) * dt_ms as f64 / 3_600_000.0;
        if amp_hours == 0.0 {
            return;
        }
        if self.series {
            // the full current flows through every pack
            for p in &mut self.packs {
                p.charge_fraction = (p.charge_fraction - amp_hours * 1000.0 / p.capacity_mah).max(0.0);
            }
        } else {
            let total_mah: f64 = self.packs.iter().map(|p| p.capacity_mah).sum();
            let fraction = amp_hours * 1000.0 / total_mah;
            for p in &mut self.packs {
                p.charge_fraction = (p.charge_fraction - fraction).max(0.0);
            }
        }
    }
}

/// Current drawn from each section, in amps.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SectionLoads {
    pub drive_a: f64,
    pub compute_a: f64,
    pub comms_a: f64,
}

impl SectionLoads {
    pub fn get(&self, id: SectionId) -> f64 {
        match id {
            SectionId::Drive => self.drive_a,
            SectionId::Compute => self.compute_a,
            SectionId::Comms => self.comms_a,
        }
    }
}

/// Drains every section by its load over `dt_ms`. Negative loads count as zero,
/// so charge never increases.
pub fn power_step(sections: &mut [PowerSection], loads: &SectionLoads, dt_ms: u64) {
    for s in sections {
        let load = loads.get(s.id);
        s.drain(load, dt_ms);
    }
}

/// The three-section layout: two 10 Ah 3S packs in series for the drive train,
/// one 5.4 Ah pack for compute, two 5.4 Ah packs in series for comms.
pub fn default_sections() -> Vec<PowerSection> {
    vec![
        PowerSection::new(SectionId::Drive, vec![Pack::full(10_000.0, 11.1); 2], true, vec![]).unwrap(),
        PowerSection::new(SectionId::Compute, vec![Pack::full(5_400.0, 11.1)], false, vec![12.0, 5.0]).unwrap(),
        PowerSection::new(SectionId::Comms, vec![Pack::full(5_400.0, 11.1); 2], true, vec![12.0, 5.0]).unwrap(),
    ]
}

/// Bus state for one section as it appears in telemetry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BusReading {
    pub section: SectionId,
    pub bus_v: f64,
    pub taps_v: Vec<f64>,
    pub charge_fraction: f64,
}

impl From<&PowerSection> for BusReading {
    fn from(s: &PowerSection) -> Self {
        Self { section: s.id, bus_v: s.bus_v(), taps_v: s.taps_v.clone(), charge_fraction: s.charge_fraction() }
    }
}
