//! The rover's single control loop: message handling, safety latches,
//! autonomy, orientation, power accounting and telemetry assembly.

use crate::geodesy::HeadingDeg;
use crate::nmea::GpsFix;
use crate::protocol::message::{Envelope, Message, ScienceAction};

use super::autonomy::{run_autonomy_step, AutonomyState, AutonomyTag, BeaconObservation};
use super::config::ControllerConfig;
use super::drive::{clamp_steer, ArmState, DriveState};
use super::orientation::{ImuSample, Orientation};
use super::power::{power_step, BusReading, PowerSection, SectionLoads};
use super::telemetry::{sanitize, SensorReadings, TelemetrySnapshot};

/// Something the controller wants sent back to the base station.
#[derive(Debug, Clone, PartialEq)]
pub enum Outbound {
    Ack { seq: u64, accepted: bool },
    /// Emit a telemetry snapshot now rather than on the next scheduled tick.
    TelemetryNow,
}

/// Sensor inputs for one control tick.
#[derive(Debug, Clone, PartialEq)]
pub struct TickInputs {
    pub fix: GpsFix,
    pub heading: Option<HeadingDeg>,
    pub beacon: Option<BeaconObservation>,
    pub imu: ImuSample,
}

#[derive(Debug, Clone)]
pub struct RoverController {
    config: ControllerConfig,
    manual: DriveState,
    output: DriveState,
    arm: ArmState,
    autonomy: AutonomyState,
    orientation: Orientation,
    power: Vec<PowerSection>,
    estopped: bool,
    link_up: bool,
    last_fix: GpsFix,
    last_science: Option<ScienceAction>,
}

impl RoverController {
    pub fn new(config: ControllerConfig) -> Self {
        let power = config.power.clone();
        Self {
            config,
            manual: DriveState::stopped(),
            output: DriveState::stopped(),
            arm: ArmState::default(),
            autonomy: AutonomyState::new(),
            orientation: Orientation::default(),
            power,
            estopped: false,
            link_up: true,
            last_fix: GpsFix::no_fix(),
            last_science: None,
        }
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.config
    }

    pub fn is_estopped(&self) -> bool {
        self.estopped
    }

    pub fn is_link_up(&self) -> bool {
        self.link_up
    }

    pub fn autonomy(&self) -> &AutonomyState {
        &self.autonomy
    }

    pub fn arm(&self) -> &ArmState {
        &self.arm
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn power(&self) -> &[PowerSection] {
        &self.power
    }

    /// Command produced by the last tick.
    pub fn output(&self) -> DriveState {
        self.output
    }

    pub fn last_science(&self) -> Option<ScienceAction> {
        self.last_science
    }

    /// Simulated load hanging from the gripper.
    pub fn set_arm_payload(&mut self, kg: f64) {
        self.arm.set_payload(kg);
    }

    fn halt_actuators(&mut self) {
        self.manual = DriveState::stopped();
        self.output = if self.estopped { DriveState::estopped() } else { DriveState::stopped() };
        self.arm.halt();
    }

    /// Applies one control message. Every control message is acked; motion
    /// commands are refused while the e-stop latch is set.
    pub fn handle_message(&mut self, envelope: &Envelope) -> Vec<Outbound> {
        let seq = envelope.id;
        let message = &envelope.message;
        if !message.is_control() {
            return Vec::new();
        }
        if self.estopped && message.is_motion() {
            return vec![Outbound::Ack { seq, accepted: false }];
        }
        let mut out = Vec::new();
        let accepted = match message {
            Message::EStop => {
                self.estopped = true;
                self.autonomy.fault("emergency stop");
                self.halt_actuators();
                true
            }
            Message::ClearEStop => {
                self.estopped = false;
                self.halt_actuators();
                true
            }
            Message::Drive { throttle, steer_deg } => {
                let idle = *throttle == 0.0 && *steer_deg == 0.0;
                if self.autonomy.is_active() {
                    // an idle deadman frame leaves autonomy alone; real input takes over
                    if !idle {
                        self.autonomy.abort();
                        self.manual = DriveState::uniform(*throttle, clamp_steer(*steer_deg, self.config.autonomy.max_steer_deg));
                    }
                } else {
                    self.manual = DriveState::uniform(*throttle, clamp_steer(*steer_deg, self.config.autonomy.max_steer_deg));
                }
                true
            }
            Message::ArmJoint { joint, rate } => {
                self.arm.set_rate(*joint, *rate);
                true
            }
            Message::SetWaypoints { points } => self.autonomy.set_waypoints(points.clone()),
            Message::StartAutonomy => {
                let started = self.autonomy.start();
                if started {
                    self.manual = DriveState::stopped();
                }
                started
            }
            Message::AbortAutonomy => {
                self.autonomy.abort();
                true
            }
            Message::ScienceCommand { action } => {
                self.last_science = Some(*action);
                if *action == ScienceAction::ReadSensors {
                    out.push(Outbound::TelemetryNow);
                }
                true
            }
            Message::Ack { .. } | Message::Telemetry { .. } | Message::Heartbeat { .. } => unreachable!("filtered above"),
        };
        out.insert(0, Outbound::Ack { seq, accepted });
        out
    }

    /// Soft failsafe for a dead control session: everything stops and an
    /// active traversal faults, but the manual e-stop latch is left alone.
    pub fn failsafe_on_link_loss(&mut self) {
        self.link_up = false;
        self.autonomy.fault("link lost");
        self.halt_actuators();
    }

    /// A fresh session is up; manual driving resumes with the next Drive.
    pub fn link_restored(&mut self) {
        self.link_up = true;
        self.manual = DriveState::stopped();
    }

    fn loads(&self, drive: &DriveState) -> SectionLoads {
        let l = &self.config.loads;
        let arm = if self.arm.is_moving() { l.arm_idle_a + l.arm_per_kg_a * self.arm.payload_kg } else { 0.0 };
        SectionLoads {
            drive_a: l.drive_idle_a + l.drive_full_a * drive.mean_abs_throttle() + arm,
            compute_a: l.compute_a,
            comms_a: l.comms_a,
        }
    }

    /// Runs one control tick and returns the actuator command.
    pub fn tick(&mut self, inputs: &TickInputs, dt_ms: u64) -> DriveState {
        self.last_fix = inputs.fix;
        self.orientation = self.config.filter.update(self.orientation, inputs.imu, inputs.heading, dt_ms);

        let drive = if self.estopped {
            DriveState::estopped()
        } else if !self.link_up {
            DriveState::stopped()
        } else if self.autonomy.is_active() {
            let heading = inputs.heading.unwrap_or(HeadingDeg::new(self.orientation.yaw_deg));
            run_autonomy_step(&mut self.autonomy, &self.config.autonomy, &inputs.fix, heading, inputs.beacon, dt_ms)
        } else {
            self.manual
        };
        if self.estopped || !self.link_up {
            self.arm.halt();
        }

        let loads = self.loads(&drive);
        power_step(&mut self.power, &loads, dt_ms);
        self.output = drive;
        drive
    }

    /// Assembles a snapshot. Sensors that did not report are left absent.
    pub fn build_snapshot(&self, sensors: &SensorReadings, t: u64) -> TelemetrySnapshot {
        let s = sanitize(sensors);
        TelemetrySnapshot {
            t,
            co2_ppm: s.co2_ppm,
            co_ppm: s.co_ppm,
            air_temp_c: s.air_temp_c,
            humidity_pct: s.humidity_pct,
            soil_temp_c: s.soil_temp_c,
            soil_moisture: s.soil_moisture,
            orientation: self.orientation,
            fix: self.last_fix,
            autonomy: self.autonomy.status(),
            power: self.power.iter().map(BusReading::from).collect(),
            estopped: self.estopped,
            arm_overload: self.arm.overload,
            camera_online: true,
        }
    }

    /// Whether the controller is currently executing autonomy.
    pub fn autonomy_tag(&self) -> AutonomyTag {
        self.autonomy.tag()
    }
}
