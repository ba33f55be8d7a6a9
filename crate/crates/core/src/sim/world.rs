//! The simulated vehicle and field.
//!
//! Every random draw comes from a ChaCha stream derived from the world seed.
//! Each sensor owns its own stream, so sampling one sensor more or less often
//! never shifts the values another sensor produces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geodesy::{
    angular_difference, destination_point, haversine_distance, initial_bearing, EarthModel, GeoPoint, HeadingDeg,
};
use crate::nmea::{encode_fix, FixQuality, GpsFix, NmeaSentence};
use crate::onboard::autonomy::BeaconObservation;
use crate::onboard::drive::DriveState;
use crate::onboard::orientation::ImuSample;
use crate::onboard::telemetry::SensorReadings;
use crate::protocol::link::{link_quality, LinkBudget, LinkQuality};

use super::terrain::{traversable, TerrainFeature, TerrainKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorldError {
    #[error("noise parameters must be finite and non-negative")]
    Noise,
    #[error("vehicle parameters must be finite and positive")]
    Vehicle,
    #[error("beacon parameters must be finite and positive")]
    Beacon,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    /// GPS fixes land uniformly inside a disk of this radius.
    pub gps_error_radius_m: f64,
    pub compass_sigma_deg: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self { gps_error_radius_m: 3.0, compass_sigma_deg: 2.0 }
    }
}

impl NoiseModel {
    pub const NONE: NoiseModel = NoiseModel { gps_error_radius_m: 0.0, compass_sigma_deg: 0.0 };

    pub fn validate(&self) -> Result<(), WorldError> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if ok(self.gps_error_radius_m) && ok(self.compass_sigma_deg) {
            Ok(())
        } else {
            Err(WorldError::Noise)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VehicleParams {
    pub wheelbase_m: f64,
    /// Distance between the left and right wheel lines, for skid turns.
    pub track_m: f64,
    pub max_speed_mps: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self { wheelbase_m: 0.9, track_m: 0.8, max_speed_mps: 1.0 }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<(), WorldError> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if ok(self.wheelbase_m) && ok(self.track_m) && ok(self.max_speed_mps) {
            Ok(())
        } else {
            Err(WorldError::Vehicle)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraParams {
    pub detection_range_m: f64,
    pub field_of_view_deg: f64,
}

impl Default for CameraParams {
    fn default() -> Self {
        Self { detection_range_m: 3.5, field_of_view_deg: 165.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Beacon {
    pub pos: GeoPoint,
    pub waypoint_index: usize,
}

/// Mean values of the environmental channels; each reading adds a little
/// Gaussian jitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorEnvironment {
    pub co2_ppm: f64,
    pub co_ppm: f64,
    pub air_temp_c: f64,
    pub humidity_pct: f64,
    pub soil_temp_c: f64,
    pub soil_moisture: f64,
    /// The soil probe only reports when it is in the ground.
    pub soil_probe_inserted: bool,
}

impl Default for SensorEnvironment {
    fn default() -> Self {
        Self {
            co2_ppm: 420.0,
            co_ppm: 1.5,
            air_temp_c: 38.0,
            humidity_pct: 30.0,
            soil_temp_c: 29.0,
            soil_moisture: 0.12,
            soil_probe_inserted: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RoverPose {
    pub pos: GeoPoint,
    pub heading: HeadingDeg,
    pub speed_mps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
enum Stream {
    Gps = 1,
    Compass = 2,
    Link = 3,
    Sensors = 4,
}

fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}

#[derive(Debug, Clone)]
pub struct SimWorld {
    seed: u64,
    t_ms: u64,
    pub rover: RoverPose,
    pub base_pos: GeoPoint,
    pub terrain: Vec<TerrainFeature>,
    pub beacons: Vec<Beacon>,
    noise: NoiseModel,
    pub link: LinkBudget,
    vehicle: VehicleParams,
    pub camera: CameraParams,
    pub environment: SensorEnvironment,
    pub earth: EarthModel,
    /// When false the receiver reports no fix, e.g. under a canopy.
    pub gps_available: bool,
    yaw_rate_dps: f64,
    blocked: bool,
    odometer_m: f64,
    gps_rng: ChaCha8Rng,
    compass_rng: ChaCha8Rng,
    link_rng: ChaCha8Rng,
    sensor_rng: ChaCha8Rng,
}

impl SimWorld {
    pub fn new(seed: u64, start: GeoPoint, heading: HeadingDeg, base_pos: GeoPoint) -> Self {
        Self {
            seed,
            t_ms: 0,
            rover: RoverPose { pos: start, heading, speed_mps: 0.0 },
            base_pos,
            terrain: Vec::new(),
            beacons: Vec::new(),
            noise: NoiseModel::default(),
            link: LinkBudget::default(),
            vehicle: VehicleParams::default(),
            camera: CameraParams::default(),
            environment: SensorEnvironment::default(),
            earth: EarthModel::default(),
            gps_available: true,
            yaw_rate_dps: 0.0,
            blocked: false,
            odometer_m: 0.0,
            gps_rng: stream(seed, Stream::Gps),
            compass_rng: stream(seed, Stream::Compass),
            link_rng: stream(seed, Stream::Link),
            sensor_rng: stream(seed, Stream::Sensors),
        }
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Result<Self, WorldError> {
        noise.validate()?;
        self.noise = noise;
        Ok(self)
    }

    pub fn with_vehicle(mut self, vehicle: VehicleParams) -> Result<Self, WorldError> {
        vehicle.validate()?;
        self.vehicle = vehicle;
        Ok(self)
    }

    pub fn with_camera(mut self, camera: CameraParams) -> Result<Self, WorldError> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(camera.detection_range_m) || !ok(camera.field_of_view_deg) || camera.field_of_view_deg > 360.0 {
            return Err(WorldError::Beacon);
        }
        self.camera = camera;
        Ok(self)
    }

    /// Places one beacon on each waypoint.
    pub fn with_beacons_at(mut self, waypoints: &[GeoPoint]) -> Self {
        self.beacons = waypoints.iter().enumerate().map(|(i, &pos)| Beacon { pos, waypoint_index: i }).collect();
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn t_ms(&self) -> u64 {
        self.t_ms
    }

    pub fn noise(&self) -> NoiseModel {
        self.noise
    }

    pub fn vehicle(&self) -> VehicleParams {
        self.vehicle
    }

    /// True if the last step was stopped by impassable terrain.
    pub fn is_blocked(&self) -> bool {
        self.blocked
    }

    /// Total ground distance covered.
    pub fn odometer_m(&self) -> f64 {
        self.odometer_m
    }

    pub fn yaw_rate_dps(&self) -> f64 {
        self.yaw_rate_dps
    }

    pub fn distance_to_base_m(&self) -> f64 {
        haversine_distance(self.rover.pos, self.base_pos, self.earth)
    }

    pub fn link_quality(&self) -> LinkQuality {
        link_quality(self.distance_to_base_m(), &self.link)
    }

    /// Decides whether one transmission survives the radio link right now.
    pub fn deliver(&mut self) -> bool {
        match self.link_quality() {
            LinkQuality::Full => true,
            LinkQuality::Degraded => self.link_rng.random::<f64>() >= self.link.degraded_loss_rate(),
            LinkQuality::Dead => false,
        }
    }

    fn impassable_at(&self, p: GeoPoint) -> Option<&TerrainFeature> {
        self.terrain.iter().find(|f| !traversable(f) && f.contains(p, self.earth))
    }

    /// Advances the world by `dt_ms` under `drive`.
    ///
    /// Front-steer bicycle kinematics plus a skid term from any left/right
    /// throttle difference, which is what lets the rover turn in place.
    /// Entering an impassable feature leaves the rover where it was.
    pub fn step(&mut self, drive: &DriveState, dt_ms: u64) {
        if dt_ms == 0 {
            return;
        }
        let dt = dt_ms as f64 / 1000.0;
        let v = self.vehicle.max_speed_mps * drive.mean_throttle().clamp(-1.0, 1.0);
        let steer = drive.steer_deg.to_radians();
        let skid = self.vehicle.max_speed_mps * (drive.left_mean() - drive.right_mean()) / self.vehicle.track_m;
        let yaw_rate = v * steer.tan() / self.vehicle.wheelbase_m + skid;
        let dpsi = yaw_rate.to_degrees() * dt;
        self.yaw_rate_dps = yaw_rate.to_degrees();

        let mid_heading = self.rover.heading.rotated(dpsi / 2.0);
        let distance = v.abs() * dt;
        let travel = if v >= 0.0 { mid_heading } else { mid_heading.rotated(180.0) };
        let next = destination_point(self.rover.pos, travel, distance, self.earth);

        self.rover.heading = self.rover.heading.rotated(dpsi);
        // only entering a bad patch is refused, so a rover dropped inside one can leave
        self.blocked = distance > 0.0 && self.impassable_at(next).is_some() && self.impassable_at(self.rover.pos).is_none();
        if self.blocked {
            self.rover.speed_mps = 0.0;
        } else {
            self.rover.pos = next;
            self.rover.speed_mps = v;
            self.odometer_m += distance;
        }
        self.t_ms += dt_ms;
    }

    /// The receiver's fix before NMEA encoding: true position displaced
    /// uniformly within the error disk.
    pub fn gps_fix_sample(&mut self) -> GpsFix {
        if !self.gps_available {
            let mut fix = GpsFix::no_fix();
            fix.utc_time = Some(self.t_ms as f64 / 1000.0);
            return fix;
        }
        let r = self.noise.gps_error_radius_m;
        let pos = if r > 0.0 {
            let radius = r * self.gps_rng.random::<f64>().sqrt();
            let theta = 360.0 * self.gps_rng.random::<f64>();
            destination_point(self.rover.pos, HeadingDeg::new(theta), radius, self.earth)
        } else {
            self.rover.pos
        };
        GpsFix {
            point: Some(pos),
            utc_time: Some(self.t_ms as f64 / 1000.0),
            quality: FixQuality::Fix,
            satellites: 9,
            hdop: Some(0.9),
            altitude_m: None,
        }
    }

    /// One GGA sentence as the onboard GPS would emit it.
    pub fn sample_gps(&mut self) -> NmeaSentence {
        let fix = self.gps_fix_sample();
        encode_fix(&fix)
    }

    pub fn sample_compass(&mut self) -> HeadingDeg {
        let sigma = self.noise.compass_sigma_deg;
        if sigma == 0.0 {
            return self.rover.heading;
        }
        let n = Normal::new(0.0, sigma).expect("sigma validated");
        self.rover.heading.rotated(n.sample(&mut self.compass_rng))
    }

    /// What the camera sees of the beacon marking `waypoint_index`.
    pub fn observe_beacon(&self, waypoint_index: usize) -> Option<BeaconObservation> {
        let beacon = self.beacons.iter().find(|b| b.waypoint_index == waypoint_index)?;
        let range_m = haversine_distance(self.rover.pos, beacon.pos, self.earth);
        if range_m > self.camera.detection_range_m {
            return None;
        }
        let bearing_deg = match initial_bearing(self.rover.pos, beacon.pos) {
            Ok(b) => angular_difference(self.rover.heading, b),
            Err(_) => 0.0,
        };
        if bearing_deg.abs() > self.camera.field_of_view_deg / 2.0 {
            return None;
        }
        Some(BeaconObservation { bearing_deg, range_m })
    }

    /// IMU reading: gravity tilted by any slope underneath, yaw rate from
    /// the last step.
    pub fn imu_sample(&self) -> ImuSample {
        let pitch = self
            .terrain
            .iter()
            .find(|f| f.kind() == TerrainKind::Slope && traversable(f) && f.contains(self.rover.pos, self.earth))
            .map_or(0.0, |f| f.angle_deg().to_radians());
        ImuSample { accel_g: [-pitch.sin(), 0.0, pitch.cos()], gyro_dps: [0.0, 0.0, self.yaw_rate_dps] }
    }

    pub fn sensor_readings(&mut self) -> SensorReadings {
        let env = self.environment;
        let rng = &mut self.sensor_rng;
        let mut jitter = |mean: f64, sigma: f64| mean + sigma * rng.sample::<f64, _>(rand_distr::StandardNormal);
        let co2 = jitter(env.co2_ppm, 5.0);
        let co = jitter(env.co_ppm, 0.05);
        let air = jitter(env.air_temp_c, 0.2);
        let hum = jitter(env.humidity_pct, 0.5);
        let soil_t = jitter(env.soil_temp_c, 0.1);
        let soil_m = jitter(env.soil_moisture, 0.005);
        SensorReadings {
            co2_ppm: Some(co2),
            co_ppm: Some(co),
            air_temp_c: Some(air),
            humidity_pct: Some(hum),
            soil_temp_c: env.soil_probe_inserted.then_some(soil_t),
            soil_moisture: env.soil_probe_inserted.then_some(soil_m),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nmea::{parse_sentence, to_fix};

    fn origin() -> GeoPoint {
        GeoPoint::new(23.78, 90.42).unwrap()
    }

    fn world(seed: u64) -> SimWorld {
        SimWorld::new(seed, origin(), HeadingDeg::new(0.0), origin())
    }

    #[test]
    fn zero_throttle_holds_pose() {
        let mut w = world(1);
        let before = w.rover;
        for _ in 0..100 {
            w.step(&DriveState::stopped(), 50);
        }
        assert_eq!(w.rover.pos, before.pos);
        assert_eq!(w.rover.heading, before.heading);
        assert_eq!(w.t_ms(), 5_000);
    }

    #[test]
    fn straight_ten_seconds_is_ten_metres() {
        let mut w = world(1);
        for _ in 0..200 {
            w.step(&DriveState::uniform(1.0, 0.0), 50);
        }
        let d = haversine_distance(origin(), w.rover.pos, w.earth);
        assert!((d - 10.0).abs() < 1e-6, "{d}");
    }

    #[test]
    fn full_lock_circle_closes() {
        let mut w = world(1);
        let params = w.vehicle();
        let radius = params.wheelbase_m / 35f64.to_radians().tan();
        let period_s = 2.0 * std::f64::consts::PI * radius / params.max_speed_mps;
        let dt_ms = 10;
        let ticks = (period_s * 1000.0 / dt_ms as f64).round() as usize;
        for _ in 0..ticks {
            w.step(&DriveState::uniform(1.0, 35.0), dt_ms);
        }
        let err = angular_difference(HeadingDeg::new(0.0), w.rover.heading);
        assert!(err.abs() < 1.0, "heading error {err}");
        assert!(haversine_distance(origin(), w.rover.pos, w.earth) < 0.05);
    }

    #[test]
    fn spin_turns_in_place() {
        let mut w = world(1);
        for _ in 0..20 {
            w.step(&DriveState::spin(0.5, 0.0), 50);
        }
        assert_eq!(w.rover.pos, origin());
        assert!(w.rover.heading.value() > 60.0 && w.rover.heading.value() < 80.0);
    }

    #[test]
    fn impassable_terrain_blocks() {
        let mut w = world(1);
        let box_at = destination_point(origin(), HeadingDeg::new(0.0), 3.0, w.earth);
        w.terrain.push(TerrainFeature::new(TerrainKind::Obstacle, box_at, 1.0, 80.0, 0.5).unwrap());
        for _ in 0..200 {
            w.step(&DriveState::uniform(1.0, 0.0), 50);
        }
        assert!(w.is_blocked());
        let d = haversine_distance(origin(), w.rover.pos, w.earth);
        assert!(d < 2.0 && d > 1.9, "{d}");
        // backing away still works
        w.step(&DriveState::uniform(-1.0, 0.0), 50);
        assert!(!w.is_blocked());
    }

    #[test]
    fn gps_noise_free_is_exact() {
        let mut w = world(3).with_noise(NoiseModel::NONE).unwrap();
        assert_eq!(w.gps_fix_sample().point, Some(origin()));
        let parsed = to_fix(&parse_sentence(w.sample_gps().to_line().as_bytes()).unwrap()).unwrap();
        assert!(haversine_distance(parsed.point.unwrap(), origin(), w.earth) < 0.2);
    }

    #[test]
    fn gps_samples_repeat_per_seed() {
        let mut a = world(9);
        let mut b = world(9);
        for _ in 0..50 {
            assert_eq!(a.sample_gps(), b.sample_gps());
        }
    }

    #[test]
    fn gps_dropout_reports_no_fix() {
        let mut w = world(1);
        w.gps_available = false;
        assert_eq!(w.gps_fix_sample().position(), None);
    }

    #[test]
    fn compass_noise_free_and_range() {
        let mut w = world(4).with_noise(NoiseModel::NONE).unwrap();
        assert_eq!(w.sample_compass(), HeadingDeg::new(0.0));
        let mut w = world(4);
        for _ in 0..1000 {
            let h = w.sample_compass().value();
            assert!((0.0..360.0).contains(&h));
        }
    }

    #[test]
    fn beacon_visibility() {
        let mut w = world(1).with_beacons_at(&[origin()]);
        w.rover.pos = destination_point(origin(), HeadingDeg::new(180.0), 3.4, w.earth);
        let seen = w.observe_beacon(0).unwrap();
        assert!((seen.range_m - 3.4).abs() < 1e-9 && seen.bearing_deg.abs() < 1e-6);
        assert!(w.observe_beacon(1).is_none());

        w.rover.heading = HeadingDeg::new(180.0);
        assert!(w.observe_beacon(0).is_none(), "behind the camera");

        w.rover.heading = HeadingDeg::new(0.0);
        w.rover.pos = destination_point(origin(), HeadingDeg::new(180.0), 5.0, w.earth);
        assert!(w.observe_beacon(0).is_none());
    }

    #[test]
    fn link_follows_distance() {
        let mut w = world(1);
        assert_eq!(w.link_quality(), LinkQuality::Full);
        assert!(w.deliver());
        w.rover.pos = destination_point(origin(), HeadingDeg::new(90.0), 1100.0, w.earth);
        assert_eq!(w.link_quality(), LinkQuality::Dead);
        assert!(!w.deliver());
        w.rover.pos = destination_point(origin(), HeadingDeg::new(90.0), 1000.0, w.earth);
        let delivered = (0..10_000).filter(|_| w.deliver()).count();
        assert!((6_700..7_300).contains(&delivered), "{delivered}");
    }

    #[test]
    fn soil_probe_absent() {
        let mut w = world(1);
        w.environment.soil_probe_inserted = false;
        let r = w.sensor_readings();
        assert!(r.soil_moisture.is_none() && r.co2_ppm.is_some());
    }

    #[test]
    fn bad_parameters_rejected() {
        assert!(world(1).with_noise(NoiseModel { gps_error_radius_m: -1.0, compass_sigma_deg: 0.0 }).is_err());
        assert!(world(1).with_vehicle(VehicleParams { wheelbase_m: 0.0, ..Default::default() }).is_err());
    }
}
