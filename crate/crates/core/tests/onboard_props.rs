mod common;

use proptest::prelude::*;
use rover_core::geodesy::destination_point;
use rover_core::onboard::{
    compute_orientation, default_sections, power_step, AutonomyTag, ControllerConfig, ImuSample, Orientation, RoverController,
    SectionLoads, TickInputs, MAX_STEER_DEG,
};
use rover_core::onboard::ArmJoint;
use rover_core::sim::{NoiseModel, Outcome};
use rover_core::{EarthModel, Envelope, GeoPoint, GpsFix, HeadingDeg, Message, Mission, Scenario};

#[derive(Debug, Clone)]
enum Step {
    Deliver(Message),
    Tick,
}

fn step() -> impl Strategy<Value = Step> {
    let here = GeoPoint::new(23.78, 90.407).unwrap();
    let goal = destination_point(here, HeadingDeg::new(30.0), 25.0, EarthModel::default());
    prop_oneof![
        3 => Just(Step::Tick),
        1 => Just(Step::Deliver(Message::EStop)),
        1 => Just(Step::Deliver(Message::ClearEStop)),
        1 => Just(Step::Deliver(Message::StartAutonomy)),
        1 => Just(Step::Deliver(Message::AbortAutonomy)),
        1 => Just(Step::Deliver(Message::SetWaypoints { points: vec![goal] })),
        2 => (-1.0f64..=1.0).prop_map(|rate| Step::Deliver(Message::ArmJoint { joint: ArmJoint::Elbow, rate })),
        3 => (-1.5f64..=1.5, -400.0f64..400.0).prop_map(|(throttle, steer_deg)| Step::Deliver(Message::Drive { throttle, steer_deg })),
    ]
}

fn inputs() -> TickInputs {
    TickInputs {
        fix: GpsFix::at(GeoPoint::new(23.78, 90.407).unwrap()),
        heading: Some(HeadingDeg::new(0.0)),
        beacon: None,
        imu: ImuSample::level_at_rest(),
    }
}

proptest! {
    #[test]
    fn estop_dominates_every_reachable_state(steps in prop::collection::vec(step(), 1..200)) {
        let mut c = RoverController::new(ControllerConfig::default());
        for (id, s) in steps.into_iter().enumerate() {
            match s {
                Step::Deliver(m) => {
                    c.handle_message(&Envelope::new(id as u64 + 1, m));
                }
                Step::Tick => {
                    let out = c.tick(&inputs(), 50);
                    prop_assert!(out.steer_deg.abs() <= MAX_STEER_DEG);
                    if c.is_estopped() {
                        prop_assert!(out.wheel_throttle.iter().all(|&w| w == 0.0));
                    }
                }
            }
            if c.is_estopped() {
                prop_assert!(c.output().is_zero());
                prop_assert!(!c.arm().is_moving());
            }
        }
    }

    #[test]
    fn steering_stays_within_limit(steers in prop::collection::vec(any::<f64>(), 1..100)) {
        let mut c = RoverController::new(ControllerConfig::default());
        for (id, steer_deg) in steers.into_iter().enumerate() {
            c.handle_message(&Envelope::new(id as u64 + 1, Message::Drive { throttle: 0.5, steer_deg }));
            let out = c.tick(&inputs(), 50);
            prop_assert!(out.steer_deg.abs() <= MAX_STEER_DEG, "{} -> {}", steer_deg, out.steer_deg);
        }
    }

    #[test]
    fn level_imu_converges_to_gravity(roll in -60.0f64..60.0, pitch in -60.0f64..60.0, r0 in -90.0f64..90.0, p0 in -90.0f64..90.0) {
        let (r, p) = (roll.to_radians(), pitch.to_radians());
        // gravity as seen by a body rolled then pitched
        let accel = [-p.sin(), p.cos() * r.sin(), p.cos() * r.cos()];
        let mut o = Orientation { roll_deg: r0, pitch_deg: p0, yaw_deg: 0.0 };
        for _ in 0..100 {
            o = compute_orientation(accel, [0.0; 3], o, 50);
        }
        prop_assert!((o.roll_deg - roll).abs() < 0.5, "roll {} vs {}", o.roll_deg, roll);
        prop_assert!((o.pitch_deg - pitch).abs() < 0.5, "pitch {} vs {}", o.pitch_deg, pitch);
    }

    #[test]
    fn charge_never_rises(loads in prop::collection::vec((0.0f64..100.0, 0.0f64..10.0, 0.0f64..10.0, 1u64..1000), 1..100)) {
        let mut sections = default_sections();
        for (drive_a, compute_a, comms_a, dt) in loads {
            let before: Vec<f64> = sections.iter().map(|s| s.charge_fraction()).collect();
            power_step(&mut sections, &SectionLoads { drive_a, compute_a, comms_a }, dt);
            for (s, b) in sections.iter().zip(before) {
                prop_assert!(s.charge_fraction() <= b);
                prop_assert!(s.charge_fraction() >= 0.0);
            }
        }
    }
}

fn course(legs: &[(f64, f64)]) -> Scenario {
    let mut s = Scenario::field_course(NoiseModel::NONE);
    let mut at = s.start_point().unwrap();
    s.waypoints = legs
        .iter()
        .map(|&(bearing, dist)| {
            at = destination_point(at, HeadingDeg::new(bearing), dist, EarthModel::default());
            at
        })
        .collect();
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Noise-free, ideal plant: any course with legs of 8 m or more finishes.
    #[test]
    fn noise_free_courses_terminate_in_arrival(legs in prop::collection::vec((0.0f64..360.0, 8.0f64..30.0), 1..6)) {
        let s = course(&legs);
        let mut m = Mission::from_scenario(&s, 1, ControllerConfig::default()).unwrap();
        let report = m.run(s.duration_ms());
        prop_assert_eq!(report.outcome, Outcome::Arrived);
        prop_assert_eq!(report.waypoints_reached, legs.len());
    }

    /// Every waypoint advance is preceded by a vision approach, noise or not.
    #[test]
    fn waypoint_advance_always_follows_vision(seed in any::<u64>(), legs in prop::collection::vec((0.0f64..360.0, 8.0f64..20.0), 1..4)) {
        let mut s = course(&legs);
        s.noise = NoiseModel::default();
        let mut m = Mission::from_scenario(&s, seed, ControllerConfig::default()).unwrap();
        let mut prev = (m.controller().autonomy_tag(), m.controller().autonomy().current_index());
        while m.now_ms() < s.duration_ms() && !m.is_finished() {
            m.step();
            let now = (m.controller().autonomy_tag(), m.controller().autonomy().current_index());
            if now.1 > prev.1 || (now.0 == AutonomyTag::Arrived && prev.0 != AutonomyTag::Arrived) {
                prop_assert_eq!(prev.0, AutonomyTag::VisionApproach, "advanced from {:?}", prev.0);
            }
            prev = now;
        }
    }
}
