//! Closed-loop mission: simulated world, onboard controller and base-station
//! bridge, joined by an in-memory radio link that follows the link budget.
//!
//! Per tick the base station runs first, then the rover handles whatever got
//! through, reads its sensors, drives, and emits telemetry.

use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::basestation::bridge::{Bridge, BridgeConfig, BridgeError};
use crate::geodesy::haversine_distance;
use crate::onboard::autonomy::AutonomyTag;
use crate::onboard::config::ControllerConfig;
use crate::onboard::controller::RoverController;
use crate::onboard::drive::DriveState;
use crate::onboard::telemetry::TelemetrySnapshot;
use crate::protocol::datagram::TelemetrySender;
use crate::protocol::link::LinkQuality;
use crate::protocol::session::{ControlSession, Role};

use super::scenario::{Outage, Scenario, ScenarioError, ScriptedCommand};
use super::rover::RoverNode;
use super::world::{RoverPose, SimWorld};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VisionEntry {
    pub waypoint_index: usize,
    pub t_ms: u64,
    /// Ground-truth distance to the waypoint at handover.
    pub true_distance_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Outcome {
    Arrived,
    Fault,
    TimedOut,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MissionReport {
    pub scenario: String,
    pub seed: u64,
    pub outcome: Outcome,
    pub sim_time_ms: u64,
    pub waypoints_reached: usize,
    pub vision_entries: Vec<VisionEntry>,
    pub fault_reason: Option<String>,
    pub distance_travelled_m: f64,
    pub telemetry_datagrams: u64,
    pub telemetry_sha256: String,
    pub charge_monotonic: bool,
    pub max_abs_steer_deg: f64,
    pub final_pose: RoverPose,
}

/// One line of the replay trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceRecord {
    pub t: u64,
    pub truth: RoverPose,
    pub link: LinkQuality,
    pub drive: DriveState,
    pub snapshot: TelemetrySnapshot,
}

/// Safety timing observed during the run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SafetyTimes {
    pub link_dead_at_ms: Option<u64>,
    /// First time after link death that the wheels were stopped.
    pub halted_after_link_loss_ms: Option<u64>,
    pub estop_sent_at_ms: Option<u64>,
    pub halted_after_estop_ms: Option<u64>,
}

pub struct Mission {
    name: String,
    world: SimWorld,
    rover: RoverNode,
    bridge: Bridge,
    telemetry_tx: TelemetrySender,
    script: Vec<ScriptedCommand>,
    script_pos: usize,
    gps_outages: Vec<Outage>,
    tick_ms: u64,
    ticks: u64,
    hasher: Sha256,
    datagrams: u64,
    trace: Option<Box<dyn Write>>,
    prev_tag: AutonomyTag,
    vision_entries: Vec<VisionEntry>,
    prev_charge: Vec<f64>,
    charge_monotonic: bool,
    max_abs_steer: f64,
    safety: SafetyTimes,
    rejected: Vec<BridgeError>,
}

impl Mission {
    pub fn from_scenario(scenario: &Scenario, seed: u64, config: ControllerConfig) -> Result<Self, ScenarioError> {
        let world = scenario.build_world(seed)?;
        let mut rover = RoverNode::new(config);
        rover.controller_mut().set_arm_payload(scenario.arm_payload_kg);
        rover.accept(0);
        let cfg = rover.controller().config().session;
        let mut bridge = Bridge::new(BridgeConfig::default());
        bridge.attach(ControlSession::new(Role::Client, cfg, 0), 0);
        let prev_charge = rover.controller().power().iter().map(|s| s.charge_fraction()).collect();
        Ok(Self {
            name: scenario.name.clone(),
            tick_ms: rover.controller().config().tick_ms,
            world,
            rover,
            bridge,
            telemetry_tx: TelemetrySender::new(),
            script: scenario.operator_script(),
            script_pos: 0,
            gps_outages: scenario.gps_outages.clone(),
            ticks: 0,
            hasher: Sha256::new(),
            datagrams: 0,
            trace: None,
            prev_tag: AutonomyTag::Idle,
            vision_entries: Vec::new(),
            prev_charge,
            charge_monotonic: true,
            max_abs_steer: 0.0,
            safety: SafetyTimes::default(),
            rejected: Vec::new(),
        })
    }

    /// Writes one JSON line per tick to `out`.
    pub fn record_to(&mut self, out: Box<dyn Write>) {
        self.trace = Some(out);
    }

    pub fn world(&self) -> &SimWorld {
        &self.world
    }

    pub fn world_mut(&mut self) -> &mut SimWorld {
        &mut self.world
    }

    pub fn controller(&self) -> &RoverController {
        self.rover.controller()
    }

    pub fn bridge(&self) -> &Bridge {
        &self.bridge
    }

    pub fn bridge_mut(&mut self) -> &mut Bridge {
        &mut self.bridge
    }

    pub fn now_ms(&self) -> u64 {
        self.world.t_ms()
    }

    pub fn safety(&self) -> SafetyTimes {
        self.safety
    }

    /// Operator commands the bridge refused.
    pub fn rejected(&self) -> &[BridgeError] {
        &self.rejected
    }

    pub fn telemetry_digest(&self) -> String {
        hex(&self.hasher.clone().finalize())
    }

    fn run_script(&mut self, now: u64) {
        while let Some(cmd) = self.script.get(self.script_pos).filter(|c| c.at_ms <= now).cloned() {
            self.script_pos += 1;
            if cmd.command == crate::basestation::bridge::OperatorCommand::EStop {
                self.safety.estop_sent_at_ms.get_or_insert(now);
            }
            if let Err(e) = self.bridge.submit(cmd.command, now) {
                self.rejected.push(e);
            }
        }
    }

    fn base_to_rover(&mut self, now: u64) {
        let Some(bytes) = self.bridge.session_mut().map(ControlSession::take_outbound) else {
            return;
        };
        if bytes.is_empty() || !self.world.deliver() {
            return;
        }
        if let Some(rover) = self.rover.session_mut() {
            rover.receive_bytes(&bytes, now);
        }
    }

    fn reconnect_if_possible(&mut self, now: u64) {
        if self.rover.has_session() || self.bridge.is_connected() || self.world.link_quality() == LinkQuality::Dead {
            return;
        }
        let cfg = self.rover.controller().config().session;
        self.rover.accept(now);
        self.bridge.attach(ControlSession::new(Role::Client, cfg, now), now);
    }

    /// Advances the whole system by one control tick.
    pub fn step(&mut self) {
        let now = self.world.t_ms();
        let dt = self.tick_ms;

        self.run_script(now);
        self.bridge.tick(now);
        self.base_to_rover(now);
        let telemetry_now = self.rover.service_link(now);

        self.world.gps_available = !self.gps_outages.iter().any(|o| (o.from_ms..o.to_ms).contains(&now));
        let drive = self.rover.control_tick(&mut self.world, dt);
        let t = self.world.t_ms();
        self.ticks += 1;
        self.observe(now, &drive);

        let scheduled = self.ticks.is_multiple_of(u64::from(self.rover.controller().config().telemetry_every_ticks.max(1)));
        let snapshot = self.rover.snapshot(&mut self.world);
        if scheduled || telemetry_now || self.trace.is_some() {
            if scheduled || telemetry_now {
                let datagram = self.telemetry_tx.datagram(&snapshot).expect("snapshots fit in one frame");
                self.hasher.update(&datagram);
                self.datagrams += 1;
                if self.world.deliver() {
                    self.bridge.ingest_telemetry(&datagram, now);
                }
            }
            if let Some(out) = self.trace.as_mut() {
                let record = TraceRecord { t, truth: self.world.rover, link: self.world.link_quality(), drive, snapshot };
                let mut line = serde_json::to_vec(&record).expect("trace records serialize");
                line.push(b'\n');
                if let Err(e) = out.write_all(&line) {
                    log::warn!("trace write failed, recording stopped: {e}");
                    self.trace = None;
                }
            }
        }

        if let Some(rover) = self.rover.session_mut() {
            let bytes = rover.take_outbound();
            if !bytes.is_empty() && self.world.deliver() {
                if let Some(base) = self.bridge.session_mut() {
                    base.receive_bytes(&bytes, now);
                }
            }
        }
        self.reconnect_if_possible(t);
    }

    fn observe(&mut self, now: u64, drive: &DriveState) {
        let t = self.world.t_ms();
        let tag = self.rover.controller().autonomy_tag();
        if tag == AutonomyTag::VisionApproach && self.prev_tag != AutonomyTag::VisionApproach {
            let index = self.rover.controller().autonomy().current_index();
            if let Some(wp) = self.rover.controller().autonomy().current_waypoint() {
                // the pose the decision was made from, before this tick's motion
                let true_distance_m = haversine_distance(self.world.rover.pos, wp, self.world.earth);
                self.vision_entries.push(VisionEntry { waypoint_index: index, t_ms: now, true_distance_m });
            }
        }
        self.prev_tag = tag;

        self.max_abs_steer = self.max_abs_steer.max(drive.steer_deg.abs());
        for (prev, s) in self.prev_charge.iter_mut().zip(self.rover.controller().power()) {
            let c = s.charge_fraction();
            if c > *prev {
                self.charge_monotonic = false;
            }
            *prev = c;
        }

        if self.safety.link_dead_at_ms.is_none() && self.world.link_quality() == LinkQuality::Dead {
            self.safety.link_dead_at_ms = Some(now);
        }
        let stopped = drive.is_zero();
        if self.safety.link_dead_at_ms.is_some() && self.safety.halted_after_link_loss_ms.is_none() && stopped {
            self.safety.halted_after_link_loss_ms = Some(t);
        }
        if self.safety.estop_sent_at_ms.is_some() && self.safety.halted_after_estop_ms.is_none() && stopped {
            self.safety.halted_after_estop_ms = Some(t);
        }
    }

    pub fn is_finished(&self) -> bool {
        matches!(self.rover.controller().autonomy_tag(), AutonomyTag::Arrived | AutonomyTag::Fault)
    }

    /// Steps until autonomy arrives or faults, or `max_ms` of simulated time.
    pub fn run(&mut self, max_ms: u64) -> MissionReport {
        while self.world.t_ms() < max_ms && !self.is_finished() {
            self.step();
        }
        self.report()
    }

    /// Steps for exactly `ms` of simulated time, whatever autonomy does.
    pub fn run_for(&mut self, ms: u64) {
        let end = self.world.t_ms() + ms;
        while self.world.t_ms() < end {
            self.step();
        }
    }

    pub fn report(&mut self) -> MissionReport {
        if let Some(out) = self.trace.as_mut() {
            let _ = out.flush();
        }
        let autonomy = self.rover.controller().autonomy();
        let outcome = match autonomy.tag() {
            AutonomyTag::Arrived => Outcome::Arrived,
            AutonomyTag::Fault => Outcome::Fault,
            _ => Outcome::TimedOut,
        };
        MissionReport {
            scenario: self.name.clone(),
            seed: self.world.seed(),
            outcome,
            sim_time_ms: self.world.t_ms(),
            waypoints_reached: autonomy.current_index(),
            vision_entries: self.vision_entries.clone(),
            fault_reason: autonomy.fault_reason().map(str::to_string),
            distance_travelled_m: self.world.odometer_m(),
            telemetry_datagrams: self.datagrams,
            telemetry_sha256: self.telemetry_digest(),
            charge_monotonic: self.charge_monotonic,
            max_abs_steer_deg: self.max_abs_steer,
            final_pose: self.world.rover,
        }
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
