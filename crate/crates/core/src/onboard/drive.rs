use serde::{Deserialize, Serialize};

/// Front-wheel steering travel in either direction.
pub const MAX_STEER_DEG: f64 = 35.0;

/// Rated arm payload; anything heavier is flagged as overload.
pub const ARM_PAYLOAD_LIMIT_KG: f64 = 5.0;

/// Wheels 0..3 are the left side (front, middle, rear), 3..6 the right side.
pub const LEFT_WHEELS: std::ops::Range<usize> = 0..3;
pub const RIGHT_WHEELS: std::ops::Range<usize> = 3..6;

fn clamp_unit(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(-1.0, 1.0)
    }
}

/// Clamps a steering request to the mechanical limit. NaN steers straight.
pub fn clamp_steer(steer_deg: f64, limit_deg: f64) -> f64 {
    let limit = limit_deg.clamp(0.0, MAX_STEER_DEG);
    if steer_deg.is_nan() {
        0.0
    } else {
        steer_deg.clamp(-limit, limit)
    }
}

/// Actuator command for the six wheel motors and the front steering.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DriveState {
    pub wheel_throttle: [f64; 6],
    pub steer_deg: f64,
    pub estopped: bool,
}

impl DriveState {
    pub fn stopped() -> Self {
        Self::default()
    }

    pub fn estopped() -> Self {
        Self { estopped: true, ..Self::default() }
    }

    /// All six wheels at the same throttle.
    pub fn uniform(throttle: f64, steer_deg: f64) -> Self {
        Self { wheel_throttle: [clamp_unit(throttle); 6], steer_deg: clamp_steer(steer_deg, MAX_STEER_DEG), estopped: false }
    }

    /// Skid turn in place: left and right sides driven in opposite directions.
    /// Positive `rate` turns clockwise.
    pub fn spin(rate: f64, steer_deg: f64) -> Self {
        let r = clamp_unit(rate);
        let mut wheel_throttle = [0.0; 6];
        wheel_throttle[LEFT_WHEELS].fill(r);
        wheel_throttle[RIGHT_WHEELS].fill(-r);
        Self { wheel_throttle, steer_deg: clamp_steer(steer_deg, MAX_STEER_DEG), estopped: false }
    }

    pub fn left_mean(&self) -> f64 {
        self.wheel_throttle[LEFT_WHEELS].iter().sum::<f64>() / 3.0
    }

    pub fn right_mean(&self) -> f64 {
        self.wheel_throttle[RIGHT_WHEELS].iter().sum::<f64>() / 3.0
    }

    pub fn mean_throttle(&self) -> f64 {
        self.wheel_throttle.iter().sum::<f64>() / 6.0
    }

    pub fn mean_abs_throttle(&self) -> f64 {
        self.wheel_throttle.iter().map(|t| t.abs()).sum::<f64>() / 6.0
    }

    pub fn is_zero(&self) -> bool {
        self.wheel_throttle.iter().all(|&t| t == 0.0) && self.steer_deg == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ArmJoint {
    Base,
    Shoulder,
    Elbow,
    Wrist,
    GripRotate,
    GripClose,
}

impl ArmJoint {
    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ArmState {
    pub joint_rate: [f64; 6],
    pub payload_kg: f64,
    pub overload: bool,
}

impl ArmState {
    pub fn set_rate(&mut self, joint: ArmJoint, rate: f64) {
        self.joint_rate[joint.index()] = clamp_unit(rate);
    }

    pub fn set_payload(&mut self, kg: f64) {
        self.payload_kg = kg.max(0.0);
        self.overload = self.payload_kg > ARM_PAYLOAD_LIMIT_KG;
    }

    pub fn halt(&mut self) {
        self.joint_rate = [0.0; 6];
    }

    pub fn is_moving(&self) -> bool {
        self.joint_rate.iter().any(|&r| r != 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steering_is_clamped() {
        assert_eq!(DriveState::uniform(1.0, 50.0).steer_deg, 35.0);
        assert_eq!(DriveState::uniform(1.0, -90.0).steer_deg, -35.0);
        assert_eq!(DriveState::uniform(1.0, f64::NAN).steer_deg, 0.0);
        assert_eq!(DriveState::uniform(3.0, 0.0).wheel_throttle, [1.0; 6]);
    }

    #[test]
    fn spin_is_differential() {
        let d = DriveState::spin(0.5, 35.0);
        assert_eq!(d.left_mean(), 0.5);
        assert_eq!(d.right_mean(), -0.5);
        assert_eq!(d.mean_throttle(), 0.0);
    }

    #[test]
    fn payload_overload_flag() {
        let mut arm = ArmState::default();
        arm.set_payload(5.0);
        assert!(!arm.overload);
        arm.set_payload(6.0);
        assert!(arm.overload);
    }
}
