use serde::{Deserialize, Serialize};

use crate::geodesy::{angular_difference, HeadingDeg};

/// Roll and pitch in (-180, 180], yaw as a compass heading in [0, 360).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Orientation {
    pub roll_deg: f64,
    pub pitch_deg: f64,
    pub yaw_deg: f64,
}

/// One accelerometer (in g) and gyro (deg/s) reading, body frame x-forward,
/// y-right, z-down-to-up such that a level rover at rest reads (0, 0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ImuSample {
    pub accel_g: [f64; 3],
    pub gyro_dps: [f64; 3],
}

impl ImuSample {
    pub fn level_at_rest() -> Self {
        Self { accel_g: [0.0, 0.0, 1.0], gyro_dps: [0.0; 3] }
    }
}

/// Roll and pitch implied by the gravity vector alone.
pub fn gravity_roll_pitch(accel_g: [f64; 3]) -> Option<(f64, f64)> {
    let [ax, ay, az] = accel_g;
    if ax * ax + ay * ay + az * az < 1e-12 {
        return None;
    }
    let roll = ay.atan2(az).to_degrees();
    let pitch = (-ax).atan2((ay * ay + az * az).sqrt()).to_degrees();
    Some((roll, pitch))
}

fn wrap_signed(deg: f64) -> f64 {
    let w = deg.rem_euclid(360.0);
    if w > 180.0 {
        w - 360.0
    } else {
        w
    }
}

/// First-order complementary filter. The blend factor for a step of `dt` is
/// `tau / (tau + dt)`, so behaviour does not depend on the tick length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplementaryFilter {
    pub time_constant_s: f64,
}

impl Default for ComplementaryFilter {
    /// 0.9 gyro weight per 50 ms tick.
    fn default() -> Self {
        Self { time_constant_s: 0.45 }
    }
}

impl ComplementaryFilter {
    pub fn alpha(&self, dt_ms: u64) -> f64 {
        let dt = dt_ms as f64 / 1000.0;
        self.time_constant_s / (self.time_constant_s + dt)
    }

    /// Propagates `prev` by one IMU sample. When a compass heading is given
    /// yaw is pulled toward it with the same blend; otherwise yaw is pure gyro
    /// integration.
    pub fn update(&self, prev: Orientation, imu: ImuSample, compass: Option<HeadingDeg>, dt_ms: u64) -> Orientation {
        let dt = dt_ms as f64 / 1000.0;
        let alpha = self.alpha(dt_ms);
        let [gx, gy, gz] = imu.gyro_dps;

        let roll_gyro = prev.roll_deg + gx * dt;
        let pitch_gyro = prev.pitch_deg + gy * dt;
        let (roll, pitch) = match gravity_roll_pitch(imu.accel_g) {
            Some((roll_acc, pitch_acc)) => (
                roll_gyro + (1.0 - alpha) * wrap_signed(roll_acc - roll_gyro),
                pitch_gyro + (1.0 - alpha) * wrap_signed(pitch_acc - pitch_gyro),
            ),
            // free fall: nothing to correct against
            None => (roll_gyro, pitch_gyro),
        };

        let yaw_gyro = HeadingDeg::new(prev.yaw_deg + gz * dt);
        let yaw = match compass {
            Some(c) => yaw_gyro.rotated((1.0 - alpha) * angular_difference(yaw_gyro, c)),
            None => yaw_gyro,
        };

        Orientation { roll_deg: wrap_signed(roll), pitch_deg: wrap_signed(pitch), yaw_deg: yaw.value() }
    }
}

/// Complementary-filter step with the default time constant and no compass.
pub fn compute_orientation(accel_g: [f64; 3], gyro_dps: [f64; 3], prev: Orientation, dt_ms: u64) -> Orientation {
    ComplementaryFilter::default().update(prev, ImuSample { accel_g, gyro_dps }, None, dt_ms)
}
