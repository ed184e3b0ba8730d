use std::sync::Arc;

use philab_core::gamma::{
    estimate_lambda_variational, extend_by_zero, reduction_to_torsion_check, run_experiment,
    run_experiment_detailed, EigenOptions, GammaReport,
};
use philab_core::geometry::{triangulate, DomainMask, DomainSequenceSpec, Grid, Shape};
use philab_core::orlicz::recorded_poincare_constant;
use philab_core::solver::{SolveOptions, Source};
use philab_core::young::{parse_young, YoungFunction};

fn nested_disks(n: usize, radii: &[f64], limit_r: f64) -> DomainSequenceSpec {
    let g = Grid::square(n, [-1.0, -1.0, 1.0, 1.0]).unwrap();
    let mut spec = DomainSequenceSpec::new("custom_list", (1..=radii.len() as u32).collect(), n);
    spec.masks = radii
        .iter()
        .map(|&r| DomainMask::rasterize(&Shape::disk(0.0, 0.0, r), g))
        .collect();
    spec.limit = Some(DomainMask::rasterize(&Shape::disk(0.0, 0.0, limit_r), g));
    spec
}

#[test]
fn eigenvalue_respects_recorded_poincare_constants() {
    for bbox in [[-1.0, -1.0, 1.0, 1.0], [0.0, 0.0, 1.0, 1.0]] {
        let g = Grid::square(24, bbox).unwrap();
        let full = Arc::new(triangulate(&DomainMask::full(g)).unwrap());
        let (cx, cy) = (0.5 * (bbox[0] + bbox[2]), 0.5 * (bbox[1] + bbox[3]));
        let disk = DomainMask::rasterize(&Shape::disk(cx, cy, 0.4 * (bbox[2] - bbox[0])), g);
        let disk = Arc::new(triangulate(&disk).unwrap());
        for spec in ["power:2", "power:3"] {
            let y = parse_young(spec).unwrap();
            let c_p = recorded_poincare_constant(spec, bbox).unwrap();
            for mesh in [&full, &disk] {
                let r =
                    estimate_lambda_variational(mesh.clone(), &y, 1.0, &EigenOptions::default())
                        .unwrap();
                assert!(
                    r.lambda >= 1.0 / c_p - 1e-9,
                    "{spec} {bbox:?}: {}",
                    r.lambda
                );
            }
        }
    }
}

#[test]
fn eigenvalue_is_independent_of_mu_for_powers() {
    let g = Grid::square(24, [-1.0, -1.0, 1.0, 1.0]).unwrap();
    let mesh =
        Arc::new(triangulate(&DomainMask::rasterize(&Shape::disk(0.0, 0.0, 1.0), g)).unwrap());
    for p in [2.0, 2.5, 3.0] {
        let y = YoungFunction::power(p).unwrap();
        let l: Vec<f64> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&mu| {
                estimate_lambda_variational(mesh.clone(), &y, mu, &EigenOptions::default())
                    .unwrap()
                    .lambda
            })
            .collect();
        assert!((l[0] - l[2]).abs() <= 1e-4 * l[1], "p={p}: {l:?}");
    }
}

#[test]
fn monotone_domains_give_monotone_solutions() {
    let spec = nested_disks(32, &[0.3, 0.5, 0.7, 0.9], 0.9);
    let y = YoungFunction::power(3.0).unwrap();
    let run = run_experiment_detailed(
        &spec,
        None,
        &y,
        &Source::Const(1.0),
        &SolveOptions::default(),
    )
    .unwrap();
    let g = *spec.masks[0].grid();
    let fields: Vec<Vec<f64>> = run
        .members
        .iter()
        .map(|m| extend_by_zero(m.as_ref(), &g))
        .collect();
    for w in fields.windows(2) {
        assert!(w[0].iter().zip(&w[1]).all(|(a, b)| *a <= b + 1e-6));
    }
    let r = &run.report;
    assert!(r
        .rows
        .windows(2)
        .all(|w| w[1].sobolev_dist < w[0].sobolev_dist));
    assert_eq!(r.rows.last().unwrap().sobolev_dist, 0.0);
}

#[test]
fn report_invariants_and_round_trip() {
    let spec = nested_disks(24, &[0.5, 0.8, 0.95], 0.7);
    let y = YoungFunction::power(2.0).unwrap();
    let r = run_experiment(
        &spec,
        None,
        &y,
        &Source::X1Squared { a: 1.0, b: 1.0 },
        &SolveOptions::default(),
    )
    .unwrap();
    assert!(r.rows.windows(2).all(|w| w[0].k < w[1].k));
    for row in &r.rows {
        for v in [
            row.d_hc,
            row.cap_diff,
            row.sobolev_dist,
            row.grad_modular_gap,
            row.l2_norm_k,
        ] {
            assert!(v.is_finite() && v >= 0.0, "{row:?}");
        }
        assert!(row.energy_k.is_finite());
    }
    let back = GammaReport::from_csv(&r.to_csv()).unwrap();
    assert_eq!(back.to_csv(), r.to_csv());
}

#[test]
fn replay_is_bit_identical() {
    let spec = DomainSequenceSpec::new("vanishing_bump", vec![4, 8], 32);
    let y = YoungFunction::power(3.0).unwrap();
    let opts = SolveOptions::default();
    let a = run_experiment(&spec, None, &y, &Source::Const(1.0), &opts).unwrap();
    let b = run_experiment(&spec, None, &y, &Source::Const(1.0), &opts).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn constant_sequence_agrees_with_torsion() {
    let spec = nested_disks(24, &[0.6, 0.6, 0.6], 0.6);
    let y = YoungFunction::power(3.0).unwrap();
    let check = reduction_to_torsion_check(
        &spec,
        None,
        &y,
        &Source::X1Squared { a: 1.0, b: 1.0 },
        &SolveOptions::default(),
    )
    .unwrap();
    assert!(check.agree);
    assert!(check.max_deviation <= 1e-8);
}
