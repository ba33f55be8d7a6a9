//! Spherical-earth navigation math.
//!
//! All angles cross the API in degrees; radians are an internal detail.
//! Distances are meters on a sphere of [`EarthModel::radius_m`].

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mean earth radius in meters.
pub const MEAN_EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Central angles below this (radians) are treated as "same point" when
/// computing a bearing. About 0.6 mm on the mean sphere.
const DEGENERATE_ANGLE_RAD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum GeoError {
    #[error("latitude {0} outside [-90, 90]")]
    LatitudeOutOfRange(f64),
    #[error("longitude {0} is not finite")]
    NonFiniteLongitude(f64),
    #[error("earth radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("bearing undefined between coincident or antipodal points")]
    DegenerateBearing,
}

/// A position on the sphere. Longitude is kept in (-180, 180].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGeoPoint", into = "RawGeoPoint")]
pub struct GeoPoint {
    lat: f64,
    lon: f64,
}

#[derive(Serialize, Deserialize)]
struct RawGeoPoint {
    lat: f64,
    lon: f64,
}

impl TryFrom<RawGeoPoint> for GeoPoint {
    type Error = GeoError;

    fn try_from(raw: RawGeoPoint) -> Result<Self, Self::Error> {
        GeoPoint::new(raw.lat, raw.lon)
    }
}

impl From<GeoPoint> for RawGeoPoint {
    fn from(p: GeoPoint) -> Self {
        RawGeoPoint { lat: p.lat, lon: p.lon }
    }
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self, GeoError> {
        if !(-90.0..=90.0).contains(&lat) {
            return Err(GeoError::LatitudeOutOfRange(lat));
        }
        if !lon.is_finite() {
            return Err(GeoError::NonFiniteLongitude(lon));
        }
        Ok(Self { lat, lon: normalize_lon(lon) })
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }
}

impl fmt::Display for GeoPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.7}, {:.7})", self.lat, self.lon)
    }
}

fn normalize_lon(lon: f64) -> f64 {
    let l = lon.rem_euclid(360.0);
    if l > 180.0 {
        l - 360.0
    } else {
        l
    }
}

/// Compass heading, clockwise from true north, always in [0, 360).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct HeadingDeg(f64);

impl HeadingDeg {
    /// Wraps any finite angle into [0, 360). Non-finite input maps to 0.
    pub fn new(deg: f64) -> Self {
        if !deg.is_finite() {
            return Self(0.0);
        }
        let h = deg.rem_euclid(360.0);
        // rem_euclid can round up to exactly 360 for tiny negative inputs
        Self(if h >= 360.0 { 0.0 } else { h })
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Heading rotated by `delta` degrees (positive = clockwise).
    pub fn rotated(self, delta: f64) -> Self {
        Self::new(self.0 + delta)
    }
}

impl From<f64> for HeadingDeg {
    fn from(deg: f64) -> Self {
        Self::new(deg)
    }
}

impl From<HeadingDeg> for f64 {
    fn from(h: HeadingDeg) -> Self {
        h.0
    }
}

impl fmt::Display for HeadingDeg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.1}°", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EarthModel {
    radius_m: f64,
}

impl EarthModel {
    pub fn new(radius_m: f64) -> Result<Self, GeoError> {
        if radius_m > 0.0 && radius_m.is_finite() {
            Ok(Self { radius_m })
        } else {
            Err(GeoError::NonPositiveRadius(radius_m))
        }
    }

    pub fn radius_m(&self) -> f64 {
        self.radius_m
    }
}

impl Default for EarthModel {
    fn default() -> Self {
        Self { radius_m: MEAN_EARTH_RADIUS_M }
    }
}

/// Central angle between two points (radians), haversine form.
fn central_angle(a: GeoPoint, b: GeoPoint) -> f64 {
    let phi1 = a.lat.to_radians();
    let phi2 = b.lat.to_radians();
    let half_dphi = (b.lat - a.lat).to_radians() / 2.0;
    let half_dlambda = (b.lon - a.lon).to_radians() / 2.0;

    let s_phi = half_dphi.sin();
    let s_lambda = half_dlambda.sin();
    let h = s_phi * s_phi + phi1.cos() * phi2.cos() * (s_lambda * s_lambda);
    let h = h.clamp(0.0, 1.0);
    2.0 * h.sqrt().atan2((1.0 - h).sqrt())
}

/// Great-circle distance in meters (haversine formula).
pub fn haversine_distance(a: GeoPoint, b: GeoPoint, earth: EarthModel) -> f64 {
    earth.radius_m * central_angle(a, b)
}

/// Forward azimuth from `a` toward `b`.
///
/// Fails with [`GeoError::DegenerateBearing`] when the points coincide (or are
/// antipodal); callers should keep their current heading in that case.
pub fn initial_bearing(a: GeoPoint, b: GeoPoint) -> Result<HeadingDeg, GeoError> {
    let sigma = central_angle(a, b);
    if sigma < DEGENERATE_ANGLE_RAD || std::f64::consts::PI - sigma < DEGENERATE_ANGLE_RAD {
        return Err(GeoError::DegenerateBearing);
    }
    let phi1 = a.lat.to_radians();
    let phi2 = b.lat.to_radians();
    let dlambda = (b.lon - a.lon).to_radians();
    let y = dlambda.sin() * phi2.cos();
    let x = phi1.cos() * phi2.sin() - phi1.sin() * phi2.cos() * dlambda.cos();
    Ok(HeadingDeg::new(y.atan2(x).to_degrees()))
}

/// Point reached by travelling `distance_m` from `origin` along the great
/// circle that leaves it at `bearing`. Negative distances are treated as zero.
pub fn destination_point(
    origin: GeoPoint,
    bearing: HeadingDeg,
    distance_m: f64,
    earth: EarthModel,
) -> GeoPoint {
    let delta = distance_m.max(0.0) / earth.radius_m;
    if delta == 0.0 {
        return origin;
    }
    let theta = bearing.0.to_radians();
    let phi1 = origin.lat.to_radians();
    let lambda1 = origin.lon.to_radians();

    let sin_phi2 = (phi1.sin() * delta.cos() + phi1.cos() * delta.sin() * theta.cos()).clamp(-1.0, 1.0);
    let phi2 = sin_phi2.asin();
    let y = theta.sin() * delta.sin() * phi1.cos();
    let x = delta.cos() - phi1.sin() * sin_phi2;
    let lambda2 = lambda1 + y.atan2(x);

    let lat = phi2.to_degrees().clamp(-90.0, 90.0);
    GeoPoint { lat, lon: normalize_lon(lambda2.to_degrees()) }
}

/// Smallest signed rotation from `current` to `target`, in (-180, 180].
/// Positive means clockwise (turn right); an exact half turn resolves to +180.
pub fn angular_difference(current: HeadingDeg, target: HeadingDeg) -> f64 {
    let d = (target.0 - current.0).rem_euclid(360.0);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint::new(lat, lon).unwrap()
    }

    #[test]
    fn construction_normalizes_longitude() {
        assert_eq!(p(0.0, 190.0).lon(), -170.0);
        assert_eq!(p(0.0, -180.0).lon(), 180.0);
        assert_eq!(p(0.0, 540.0).lon(), 180.0);
        assert!(GeoPoint::new(90.5, 0.0).is_err());
        assert!(GeoPoint::new(f64::NAN, 0.0).is_err());
        assert!(GeoPoint::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn heading_wraps() {
        assert_eq!(HeadingDeg::new(360.0).value(), 0.0);
        assert_eq!(HeadingDeg::new(-90.0).value(), 270.0);
        assert_eq!(HeadingDeg::new(-1e-20).value(), 0.0);
        assert_eq!(HeadingDeg::new(725.0).value(), 5.0);
    }

    #[test]
    fn earth_model_rejects_bad_radius() {
        assert!(EarthModel::new(0.0).is_err());
        assert!(EarthModel::new(-1.0).is_err());
        assert_eq!(EarthModel::default().radius_m(), 6_371_000.0);
    }

    #[test]
    fn identical_points_are_zero_apart() {
        let a = p(23.78, 90.42);
        assert_eq!(haversine_distance(a, a, EarthModel::default()), 0.0);
    }

    #[test]
    fn one_degree_on_equator() {
        // R * (pi / 180)
        let d = haversine_distance(p(0.0, 0.0), p(0.0, 1.0), EarthModel::default());
        assert!((d - 111_194.926_644_558_7).abs() < 1e-6, "{d}");
    }

    #[test]
    fn antipodal_arc() {
        // pi * R
        let d = haversine_distance(p(0.0, 0.0), p(0.0, 180.0), EarthModel::default());
        assert!((d - 20_015_086.796_020_57).abs() < 1e-4, "{d}");
    }

    #[test]
    fn cardinal_bearings() {
        let o = p(0.0, 0.0);
        assert!(initial_bearing(o, p(1.0, 0.0)).unwrap().value().abs() < 1e-12);
        assert!((initial_bearing(o, p(0.0, 1.0)).unwrap().value() - 90.0).abs() < 1e-12);
        assert!((initial_bearing(o, p(-1.0, 0.0)).unwrap().value() - 180.0).abs() < 1e-12);
        assert!((initial_bearing(o, p(0.0, -1.0)).unwrap().value() - 270.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_bearing_is_an_error() {
        let a = p(12.0, 34.0);
        assert_eq!(initial_bearing(a, a), Err(GeoError::DegenerateBearing));
        assert_eq!(initial_bearing(p(0.0, 0.0), p(0.0, 180.0)), Err(GeoError::DegenerateBearing));
    }

    #[test]
    fn destination_examples() {
        let o = p(0.0, 0.0);
        assert_eq!(destination_point(o, HeadingDeg::new(0.0), 0.0, EarthModel::default()), o);
        let east = destination_point(o, HeadingDeg::new(90.0), 111_194.926_644_558_7, EarthModel::default());
        assert!(east.lat().abs() < 1e-6);
        assert!((east.lon() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn destination_crosses_antimeridian() {
        let o = p(0.0, 179.9);
        let q = destination_point(o, HeadingDeg::new(90.0), 30_000.0, EarthModel::default());
        assert!(q.lon() < -179.0);
        let d = haversine_distance(o, q, EarthModel::default());
        assert!((d - 30_000.0).abs() < 1e-6);
    }

    #[test]
    fn angular_difference_examples() {
        let h = HeadingDeg::new;
        assert_eq!(angular_difference(h(0.0), h(90.0)), 90.0);
        assert!((angular_difference(h(350.0), h(10.0)) - 20.0).abs() < 1e-12);
        assert_eq!(angular_difference(h(0.0), h(180.0)), 180.0);
        assert_eq!(angular_difference(h(180.0), h(0.0)), 180.0);
        assert_eq!(angular_difference(h(90.0), h(0.0)), -90.0);
    }

    #[test]
    fn serde_shapes() {
        let json = serde_json::to_string(&p(1.5, -2.25)).unwrap();
        assert_eq!(json, r#"{"lat":1.5,"lon":-2.25}"#);
        assert!(serde_json::from_str::<GeoPoint>(r#"{"lat":91.0,"lon":0.0}"#).is_err());
        let h: HeadingDeg = serde_json::from_str("-10.0").unwrap();
        assert_eq!(h.value(), 350.0);
    }
}
