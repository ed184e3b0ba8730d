use philab_core::young::{
    log_grid, monotonicity_constant, monotonicity_gap, morrey_integral, parse_young, verify_growth,
    YoungFunction,
};
use proptest::prelude::*;

const FAMILIES: &[&str] = &[
    "power:3",
    "powerlog:1,1,1",
    "spliced:2,3,1",
    "product(power:2,power:1.5)",
    "compose(power:2,powerlog:1,1,1)",
];

const SLACK: f64 = 1e-6;

fn young(i: usize) -> YoungFunction {
    parse_young(FAMILIES[i]).unwrap()
}

fn log_uniform() -> impl Strategy<Value = f64> {
    (-2.0f64..2.0).prop_map(|e| 10f64.powf(e))
}

fn fd_phi_prime(y: &YoungFunction, t: f64) -> f64 {
    let h = 1e-6 * t;
    (y.phi(t + h) - y.phi(t - h)) / (2.0 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn young_inequality(i in 0..FAMILIES.len(), a in log_uniform(), b in log_uniform()) {
        let y = young(i);
        let rhs = y.big_phi(a) + y.conjugate(b).unwrap();
        prop_assert!(a * b <= rhs * (1.0 + SLACK), "{} {a} {b}", FAMILIES[i]);
    }

    #[test]
    fn power_bounds_on_dilation(i in 0..FAMILIES.len(), s in log_uniform(), t in log_uniform()) {
        let y = young(i);
        let g = y.indices();
        let lo = s.powf(g.p_minus + 1.0).min(s.powf(g.p_plus + 1.0));
        let hi = s.powf(g.p_minus + 1.0).max(s.powf(g.p_plus + 1.0));
        let v = y.big_phi(s * t);
        prop_assert!(v >= lo * y.big_phi(t) * (1.0 - SLACK));
        prop_assert!(v <= hi * y.big_phi(t) * (1.0 + SLACK));
    }

    #[test]
    fn doubling(i in 0..FAMILIES.len(), a in log_uniform(), b in log_uniform()) {
        let y = young(i);
        let c = 2f64.powf(y.indices().p_plus + 1.0);
        prop_assert!(y.big_phi(a + b) <= c * (y.big_phi(a) + y.big_phi(b)) * (1.0 + SLACK));
    }

    #[test]
    fn conjugate_of_density(i in 0..FAMILIES.len(), t in log_uniform()) {
        let y = young(i);
        let lhs = y.conjugate(y.phi(t)).unwrap();
        prop_assert!(lhs <= (y.indices().p_plus + 1.0) * y.big_phi(t) * (1.0 + SLACK));
    }

    #[test]
    fn lower_curvature_bound(i in 0..FAMILIES.len(), t in log_uniform()) {
        let y = young(i);
        let p = y.indices().p_minus;
        prop_assert!(t * t * fd_phi_prime(&y, t) >= p * (p + 1.0) * y.big_phi(t) * (1.0 - SLACK));
    }

    #[test]
    fn phi_of_sqrt_is_convex(i in 0..FAMILIES.len(), t in log_uniform()) {
        let y = young(i);
        let tilde = |s: f64| y.big_phi(s.sqrt());
        let h = 1e-2 * t;
        let second = tilde(t + h) - 2.0 * tilde(t) + tilde(t - h);
        prop_assert!(second >= -SLACK * tilde(t));
    }

    #[test]
    fn phi_of_sqrt_dilation(i in 0..FAMILIES.len(), s in log_uniform(), t in log_uniform()) {
        let y = young(i);
        let g = y.indices();
        let (e1, e2) = (0.5 * (g.p_minus + 1.0), 0.5 * (g.p_plus + 1.0));
        let tilde = |x: f64| y.big_phi(x.sqrt());
        let v = tilde(s * t);
        prop_assert!(v >= s.powf(e1).min(s.powf(e2)) * tilde(t) * (1.0 - SLACK));
        prop_assert!(v <= s.powf(e1).max(s.powf(e2)) * tilde(t) * (1.0 + SLACK));
    }

    #[test]
    fn monotonicity_gap_is_nonnegative(
        i in 0..FAMILIES.len(),
        a in prop::collection::vec(-2.0f64..2.0, 3),
        b in prop::collection::vec(-2.0f64..2.0, 3),
    ) {
        let gap = monotonicity_gap(&young(i), &a, &b).unwrap();
        prop_assert!(gap >= 0.0, "{gap}");
    }

    #[test]
    fn refined_monotonicity_for_cubes(
        a in prop::collection::vec(-2.0f64..2.0, 2),
        b in prop::collection::vec(-2.0f64..2.0, 2),
    ) {
        let y = YoungFunction::power(3.0).unwrap();
        let d = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        prop_assume!(d > 1e-9);
        let gap = monotonicity_gap(&y, &a, &b).unwrap();
        prop_assert!(gap >= monotonicity_constant(2.0) * y.big_phi(d) * (1.0 - SLACK));
    }

    #[test]
    fn inverses_round_trip(i in 0..FAMILIES.len(), t in log_uniform()) {
        let y = young(i);
        let back = y.phi_inverse(y.phi(t)).unwrap();
        prop_assert!((back - t).abs() <= 1e-9 * t);
        let back = y.big_phi_inverse(y.big_phi(t)).unwrap();
        prop_assert!((back - t).abs() <= 1e-9 * t);
    }
}

#[test]
fn measured_indices_stay_inside_declared() {
    let grid = log_grid(1e-3, 1e3, 301);
    for spec in FAMILIES {
        let y = parse_young(spec).unwrap();
        let r = verify_growth(&y, &grid).unwrap();
        let g = y.indices();
        assert!(r.measured_p_minus >= g.p_minus - 1e-6, "{spec}: {r}");
        assert!(r.measured_p_plus <= g.p_plus + 1e-6, "{spec}: {r}");
        assert!(r.big_phi_convex && r.phi_tilde_convex, "{spec}: {r}");
    }
}

#[test]
fn morrey_matches_power_rule() {
    for p in [1.5, 2.0, 2.5, 3.0, 4.0] {
        for n in [2u32, 3] {
            let v = morrey_integral(&YoungFunction::power(p).unwrap(), n).unwrap();
            assert_eq!(v.is_finite(), p > n as f64, "p={p} n={n}: {v}");
        }
    }
}
