use proptest::prelude::*;
use rover_core::nmea::{encode_fix, parse_sentence, to_fix};
use rover_core::{FixQuality, GeoPoint, GpsFix};

fn fix() -> impl Strategy<Value = GpsFix> {
    (
        -90.0f64..=90.0,
        -180.0f64..180.0,
        prop::option::of(0.0f64..86_400.0),
        prop_oneof![Just(FixQuality::NoFix), Just(FixQuality::Fix), Just(FixQuality::DGps)],
        0u32..30,
        prop::option::of(0.5f64..30.0),
        prop::option::of(-400.0f64..9000.0),
    )
        .prop_map(|(lat, lon, utc_time, quality, satellites, hdop, altitude_m)| GpsFix {
            point: (quality != FixQuality::NoFix).then(|| GeoPoint::new(lat, lon).unwrap()),
            utc_time,
            quality,
            satellites,
            hdop,
            altitude_m,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(3000))]

    #[test]
    fn parser_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let _ = parse_sentence(&bytes).and_then(|s| to_fix(&s));
    }

    #[test]
    fn parser_never_panics_on_dollar_prefixed_text(body in "[A-Z0-9,.*$\\-]{0,90}") {
        let _ = parse_sentence(format!("${body}\r\n").as_bytes()).and_then(|s| to_fix(&s));
    }

    #[test]
    fn encode_parse_encode_is_a_fixed_point(f in fix()) {
        let first = encode_fix(&f).to_line();
        let back = to_fix(&parse_sentence(first.as_bytes()).unwrap()).unwrap();
        prop_assert_eq!(encode_fix(&back).to_line(), first);
        if let (Some(a), Some(b)) = (f.position(), back.position()) {
            // 4-decimal minutes
            prop_assert!((a.lat() - b.lat()).abs() <= 1e-6 + 1e-12);
            prop_assert!((a.lon() - b.lon()).abs() <= 1e-6 + 1e-12);
        }
    }

    #[test]
    fn single_byte_corruption_is_rejected(f in fix(), at in any::<prop::sample::Index>(), replacement in any::<u8>()) {
        let line = encode_fix(&f).to_line();
        let star = line.find('*').unwrap();
        // payload is everything strictly between '$' and '*'
        let i = 1 + at.index(star - 1);
        prop_assume!(line.as_bytes()[i] != replacement);
        let mut bytes = line.into_bytes();
        bytes[i] = replacement;
        prop_assert!(parse_sentence(&bytes).is_err());
    }
}

#[test]
fn crlf_is_optional_on_input() {
    let line = encode_fix(&GpsFix::at(GeoPoint::new(-33.5, 151.25).unwrap())).to_line();
    assert!(line.ends_with("\r\n"));
    let bare = line.trim_end();
    assert_eq!(parse_sentence(bare.as_bytes()).unwrap(), parse_sentence(line.as_bytes()).unwrap());
}
