//! The onboard side of a simulated rover: controller plus control session,
//! fed by a [`SimWorld`]'s sensors. Transport-agnostic, so the mission
//! harness and a socket-backed host can share it.

use crate::nmea::{parse_sentence, to_fix, GpsFix};
use crate::onboard::config::ControllerConfig;
use crate::onboard::controller::{Outbound, RoverController, TickInputs};
use crate::onboard::drive::DriveState;
use crate::onboard::telemetry::TelemetrySnapshot;
use crate::protocol::message::Message;
use crate::protocol::session::{ControlSession, Liveness, Role};

use super::world::SimWorld;

#[derive(Debug)]
pub struct RoverNode {
    controller: RoverController,
    session: Option<ControlSession>,
}

impl RoverNode {
    pub fn new(config: ControllerConfig) -> Self {
        Self { controller: RoverController::new(config), session: None }
    }

    pub fn controller(&self) -> &RoverController {
        &self.controller
    }

    pub fn controller_mut(&mut self) -> &mut RoverController {
        &mut self.controller
    }

    pub fn session_mut(&mut self) -> Option<&mut ControlSession> {
        self.session.as_mut()
    }

    pub fn has_session(&self) -> bool {
        self.session.is_some()
    }

    /// A base station connected. Replaces any previous session.
    pub fn accept(&mut self, now_ms: u64) {
        let had_link = self.controller.is_link_up();
        self.session = Some(ControlSession::new(Role::Server, self.controller.config().session, now_ms));
        if !had_link {
            self.controller.link_restored();
        }
    }

    /// Runs the watchdog and applies received commands, queueing acks.
    /// Returns true when a command asked for immediate telemetry.
    pub fn service_link(&mut self, now_ms: u64) -> bool {
        let Some(session) = self.session.as_mut() else {
            return false;
        };
        if *session.poll(now_ms) != Liveness::Alive {
            self.session = None;
            self.controller.failsafe_on_link_loss();
            return false;
        }
        let mut telemetry_now = false;
        while let Some(envelope) = session.recv() {
            for out in self.controller.handle_message(&envelope) {
                match out {
                    Outbound::Ack { seq, accepted } => {
                        let _ = session.send(Message::Ack { seq, accepted });
                    }
                    Outbound::TelemetryNow => telemetry_now = true,
                }
            }
        }
        telemetry_now
    }

    /// Reads the world's sensors the way the hardware would (GPS as an NMEA
    /// sentence), runs one control tick and moves the world.
    pub fn control_tick(&mut self, world: &mut SimWorld, dt_ms: u64) -> DriveState {
        let line = world.sample_gps().to_line();
        let fix = parse_sentence(line.as_bytes()).and_then(|s| to_fix(&s)).unwrap_or_else(|_| GpsFix::no_fix());
        let inputs = TickInputs {
            fix,
            heading: Some(world.sample_compass()),
            beacon: world.observe_beacon(self.controller.autonomy().current_index()),
            imu: world.imu_sample(),
        };
        let drive = self.controller.tick(&inputs, dt_ms);
        world.step(&drive, dt_ms);
        drive
    }

    pub fn snapshot(&self, world: &mut SimWorld) -> TelemetrySnapshot {
        let readings = world.sensor_readings();
        self.controller.build_snapshot(&readings, world.t_ms())
    }
}
