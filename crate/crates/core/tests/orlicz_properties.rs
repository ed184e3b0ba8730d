use philab_core::orlicz::{luxemburg_norm, modular, WeightedSamples};
use philab_core::young::{parse_young, YoungFunction};
use proptest::prelude::*;

const FAMILIES: &[&str] = &["power:2", "power:3", "powerlog:1,1,1", "spliced:2,3,1"];

fn samples() -> impl Strategy<Value = WeightedSamples> {
    prop::collection::vec((-5.0f64..5.0, 0.01f64..1.0), 1..40)
        .prop_map(|v| {
            let (values, weights) = v.into_iter().unzip();
            WeightedSamples::new(values, weights).unwrap()
        })
        .prop_filter("nonzero", |s| s.max_abs() > 1e-6)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn unit_ball(i in 0..FAMILIES.len(), s in samples()) {
        let y = parse_young(FAMILIES[i]).unwrap();
        let norm = luxemburg_norm(&y, &s);
        prop_assert!(modular(&y, &s.scaled(1.0 / norm)) <= 1.0 + 1e-9);
        prop_assert!(modular(&y, &s.scaled(1.0 / (norm * (1.0 - 1e-6)))) > 1.0 - 1e-9);
        prop_assert_eq!(norm <= 1.0, modular(&y, &s) <= 1.0 + 1e-9);
    }

    #[test]
    fn homogeneity(i in 0..FAMILIES.len(), s in samples(), c in -10.0f64..10.0) {
        prop_assume!(c.abs() > 1e-3);
        let y = parse_young(FAMILIES[i]).unwrap();
        let a = luxemburg_norm(&y, &s.scaled(c));
        let b = c.abs() * luxemburg_norm(&y, &s);
        prop_assert!(close(a, b, 1e-8), "{a} {b}");
    }

    #[test]
    fn triangle_inequality(i in 0..FAMILIES.len(), s in samples(), shift in -3.0f64..3.0) {
        let y = parse_young(FAMILIES[i]).unwrap();
        let t = WeightedSamples::new(
            s.values().iter().map(|v| v.sin() + shift).collect(),
            s.weights().to_vec(),
        ).unwrap();
        let sum = WeightedSamples::new(
            s.values().iter().zip(t.values()).map(|(a, b)| a + b).collect(),
            s.weights().to_vec(),
        ).unwrap();
        let lhs = luxemburg_norm(&y, &sum);
        prop_assert!(lhs <= (luxemburg_norm(&y, &s) + luxemburg_norm(&y, &t)) * (1.0 + 1e-8));
    }

    #[test]
    fn holder_pairing(i in 0..FAMILIES.len(), s in samples()) {
        let y = parse_young(FAMILIES[i]).unwrap();
        let yc = y.complementary();
        let t = WeightedSamples::new(
            s.values().iter().map(|v| (3.0 * v).cos()).collect(),
            s.weights().to_vec(),
        ).unwrap();
        let pairing: f64 = s.values().iter().zip(t.values()).zip(s.weights())
            .map(|((a, b), w)| w * (a * b).abs())
            .sum();
        let bound = 2.0 * luxemburg_norm(&y, &s) * luxemburg_norm(&yc, &t);
        prop_assert!(pairing <= bound * (1.0 + 1e-8), "{pairing} {bound}");
    }

    #[test]
    fn power_norm_matches_closed_form(p in 1.2f64..5.0, s in samples()) {
        let y = YoungFunction::power(p).unwrap();
        let sum: f64 = s.values().iter().zip(s.weights()).map(|(v, w)| w * v.abs().powf(p) / p).sum();
        prop_assert!(close(luxemburg_norm(&y, &s), sum.powf(1.0 / p), 1e-8));
    }
}

#[test]
fn constant_function_norm() {
    // ‖c‖ on total weight W is c / Φ⁻¹(1/W)
    for spec in FAMILIES {
        let y = parse_young(spec).unwrap();
        for (c, w) in [(1.0, 1.0), (2.5, 4.0), (0.3, 0.2)] {
            let s = WeightedSamples::constant(c, w).unwrap();
            let expected = c / y.big_phi_inverse(1.0 / w).unwrap();
            assert!(
                close(luxemburg_norm(&y, &s), expected, 1e-8),
                "{spec} {c} {w}"
            );
        }
    }
}
