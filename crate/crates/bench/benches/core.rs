use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rover_core::geodesy::{destination_point, haversine_distance, initial_bearing};
use rover_core::nmea::{encode_fix, parse_sentence, to_fix};
use rover_core::onboard::config::ControllerConfig;
use rover_core::protocol::codec::{encode, FrameReader};
use rover_core::sim::world::NoiseModel;
use rover_core::{EarthModel, Envelope, GeoPoint, GpsFix, HeadingDeg, Message, Mission, Scenario};

fn geodesy(c: &mut Criterion) {
    let earth = EarthModel::default();
    let a = GeoPoint::new(23.78, 90.407).unwrap();
    let b = GeoPoint::new(-33.86, 151.21).unwrap();
    c.bench_function("haversine_distance", |bench| bench.iter(|| haversine_distance(black_box(a), black_box(b), earth)));
    c.bench_function("initial_bearing", |bench| bench.iter(|| initial_bearing(black_box(a), black_box(b))));
    c.bench_function("destination_point", |bench| {
        bench.iter(|| destination_point(black_box(a), HeadingDeg::new(47.0), black_box(1234.5), earth))
    });
}

fn nmea(c: &mut Criterion) {
    let fix = GpsFix::at(GeoPoint::new(23.780123, 90.407456).unwrap());
    let line = encode_fix(&fix).to_line();
    c.bench_function("gga_parse", |bench| {
        bench.iter(|| to_fix(&parse_sentence(black_box(line.as_bytes())).unwrap()).unwrap())
    });
    c.bench_function("gga_encode", |bench| bench.iter(|| encode_fix(black_box(&fix)).to_line()));
}

fn codec(c: &mut Criterion) {
    let msg = Envelope::new(42, Message::Drive { throttle: 0.5, steer_deg: -12.0 });
    let frame = encode(&msg).unwrap();
    let stream: Vec<u8> = (0..100).flat_map(|_| frame.clone()).collect();
    c.bench_function("frame_encode", |bench| bench.iter(|| encode(black_box(&msg)).unwrap()));
    c.bench_function("frame_decode_100_in_7_byte_chunks", |bench| {
        bench.iter(|| {
            let mut dec = FrameReader::new();
            let mut n = 0;
            for chunk in stream.chunks(7) {
                dec.push(chunk);
                while dec.next_frame().unwrap().is_some() {
                    n += 1;
                }
            }
            n
        })
    });
}

fn mission(c: &mut Criterion) {
    let scenario = Scenario::field_course(NoiseModel::default());
    c.bench_function("mission_step", |bench| {
        let mut m = Mission::from_scenario(&scenario, 7, ControllerConfig::default()).unwrap();
        bench.iter(|| {
            if m.is_finished() {
                m = Mission::from_scenario(&scenario, 7, ControllerConfig::default()).unwrap();
            }
            m.step()
        })
    });
}

criterion_group!(benches, geodesy, nmea, codec, mission);
criterion_main!(benches);
