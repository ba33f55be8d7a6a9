//! Pass/fail traversability of terrain features.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geodesy::{haversine_distance, EarthModel, GeoPoint};

/// Vertical-drop limit curve anchors, (angle°, max height m).
pub const DROP_ANCHOR_LOW: (f64, f64) = (60.0, 0.45);
pub const DROP_ANCHOR_HIGH: (f64, f64) = (90.0, 0.7);
pub const SLOPE_MAX_ANGLE_DEG: f64 = 35.0;
pub const SLOPE_MAX_HEIGHT_M: f64 = 1.2;
/// Tallest block the chassis has been seen to climb.
pub const OBSTACLE_MAX_HEIGHT_M: f64 = 0.2794;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TerrainKind {
    VerticalDrop,
    Slope,
    Obstacle,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TerrainError {
    #[error("angle {0}° outside (0, 90]")]
    Angle(f64),
    #[error("height {0} m must be positive")]
    Height(f64),
    #[error("extent {0} m must be positive")]
    Extent(f64),
}

/// A circular patch of terrain centred on `location`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", try_from = "RawFeature")]
pub struct TerrainFeature {
    kind: TerrainKind,
    location: GeoPoint,
    extent_m: f64,
    angle_deg: f64,
    height_m: f64,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawFeature {
    kind: TerrainKind,
    location: GeoPoint,
    extent_m: f64,
    angle_deg: f64,
    height_m: f64,
}

impl TryFrom<RawFeature> for TerrainFeature {
    type Error = TerrainError;

    fn try_from(r: RawFeature) -> Result<Self, Self::Error> {
        TerrainFeature::new(r.kind, r.location, r.extent_m, r.angle_deg, r.height_m)
    }
}

impl TerrainFeature {
    pub fn new(kind: TerrainKind, location: GeoPoint, extent_m: f64, angle_deg: f64, height_m: f64) -> Result<Self, TerrainError> {
        if !(angle_deg > 0.0 && angle_deg <= 90.0) {
            return Err(TerrainError::Angle(angle_deg));
        }
        if !(height_m > 0.0) || !height_m.is_finite() {
            return Err(TerrainError::Height(height_m));
        }
        if !(extent_m > 0.0) || !extent_m.is_finite() {
            return Err(TerrainError::Extent(extent_m));
        }
        Ok(Self { kind, location, extent_m, angle_deg, height_m })
    }

    pub fn kind(&self) -> TerrainKind {
        self.kind
    }

    pub fn location(&self) -> GeoPoint {
        self.location
    }

    pub fn extent_m(&self) -> f64 {
        self.extent_m
    }

    pub fn angle_deg(&self) -> f64 {
        self.angle_deg
    }

    pub fn height_m(&self) -> f64 {
        self.height_m
    }

    pub fn contains(&self, p: GeoPoint, earth: EarthModel) -> bool {
        haversine_distance(self.location, p, earth) <= self.extent_m
    }
}

/// Highest vertical drop the chassis survives at `angle_deg`: linear between
/// the two anchors, flat outside them.
pub fn vertical_drop_limit_m(angle_deg: f64) -> f64 {
    let (a0, h0) = DROP_ANCHOR_LOW;
    let (a1, h1) = DROP_ANCHOR_HIGH;
    if angle_deg <= a0 {
        return h0;
    }
    if angle_deg >= a1 {
        return h1;
    }
    let t = (angle_deg - a0) / (a1 - a0);
    (1.0 - t) * h0 + t * h1
}

pub fn traversable(feature: &TerrainFeature) -> bool {
    let h = feature.height_m;
    match feature.kind {
        TerrainKind::VerticalDrop => h <= vertical_drop_limit_m(feature.angle_deg),
        TerrainKind::Slope => feature.angle_deg <= SLOPE_MAX_ANGLE_DEG && h <= SLOPE_MAX_HEIGHT_M,
        TerrainKind::Obstacle => h <= OBSTACLE_MAX_HEIGHT_M,
    }
}
