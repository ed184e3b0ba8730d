use std::sync::Arc;

use philab_core::geometry::{triangulate, DomainMask, Grid, Mesh, Shape};
use philab_core::solver::bounds::{
    a_priori_ratio, recorded_a_priori_constant, recorded_stability_constant, stability_ratio,
};
use philab_core::solver::{solve, solve_from, Problem, SolveOptions, Source};
use philab_core::young::{parse_young, YoungFunction};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BOX: [f64; 4] = [-1.0, -1.0, 1.0, 1.0];

fn square_mesh(n: usize) -> Arc<Mesh> {
    let g = Grid::square(n, BOX).unwrap();
    Arc::new(triangulate(&DomainMask::full(g)).unwrap())
}

fn disk_mesh(n: usize, r: f64) -> Arc<Mesh> {
    let g = Grid::square(n, BOX).unwrap();
    Arc::new(triangulate(&DomainMask::rasterize(&Shape::disk(0.0, 0.0, r), g)).unwrap())
}

fn random_field(mesh: &Mesh, rng: &mut ChaCha8Rng) -> Vec<f64> {
    mesh.dirichlet()
        .iter()
        .map(|&d| if d { 0.0 } else { rng.gen_range(-1.0..1.0) })
        .collect()
}

fn solved(y: &YoungFunction, mesh: &Arc<Mesh>, f: Vec<f64>) -> (Problem, Vec<f64>) {
    let p = Problem::new(y.clone(), mesh.clone(), f).unwrap();
    let (u, rep) = solve(&p, &SolveOptions::default()).unwrap();
    assert!(rep.converged);
    (p, u.into_values())
}

#[test]
fn gradient_matches_finite_differences() {
    let mesh = square_mesh(6);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for spec in ["power:3", "powerlog:1,1,1", "spliced:2,3,1"] {
        let y = parse_young(spec).unwrap();
        let f = Source::X1Squared { a: 1.0, b: 2.0 }.nodal(&mesh);
        let p = Problem::new(y, mesh.clone(), f)
            .unwrap()
            .with_zero_order(vec![0.5; mesh.n_nodes()])
            .unwrap();
        let u = random_field(&mesh, &mut rng);
        let eps = 1e-3;
        let g = p.gradient(&u, eps);
        for i in (0..u.len()).filter(|&i| !mesh.dirichlet()[i]) {
            let h = 1e-6;
            let (mut up, mut um) = (u.clone(), u.clone());
            up[i] += h;
            um[i] -= h;
            let fd = (p.energy(&up, eps) - p.energy(&um, eps)) / (2.0 * h);
            assert!(
                (fd - g[i]).abs() <= 1e-6 * (1.0 + g[i].abs()),
                "{spec} node {i}: {fd} vs {}",
                g[i]
            );
        }
    }
}

#[test]
fn quadratic_gradient_matches_five_point_stencil() {
    // for Φ = t²/2 on a uniform square mesh the P1 stiffness is the
    // five-point Laplacian and the lumped mass of an interior node is h²
    let n = 12;
    let mesh = square_mesh(n);
    let h = 2.0 / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u = random_field(&mesh, &mut rng);
    let f: Vec<f64> = (0..mesh.n_nodes())
        .map(|_| rng.gen_range(-2.0..2.0))
        .collect();
    let p = Problem::new(YoungFunction::power(2.0).unwrap(), mesh.clone(), f.clone()).unwrap();
    let g = p.gradient(&u, 0.0);
    let at = |i: usize, j: usize| mesh.node_at(i, j).map_or(0.0, |k| u[k]);
    for j in 1..n {
        for i in 1..n {
            let k = mesh.node_at(i, j).unwrap();
            let lap = 4.0 * at(i, j) - at(i - 1, j) - at(i + 1, j) - at(i, j - 1) - at(i, j + 1);
            let expected = lap - h * h * f[k];
            assert!(
                (g[k] - expected).abs() <= 1e-12 * (1.0 + expected.abs()),
                "{i},{j}"
            );
        }
    }
}

#[test]
fn restart_from_solution_agrees() {
    let mesh = disk_mesh(24, 0.9);
    let y = YoungFunction::power(3.0).unwrap();
    let (p, u) = solved(&y, &mesh, Source::Const(1.0).nodal(&mesh));
    let (v, rep) = solve_from(&p, &SolveOptions::default(), &u).unwrap();
    assert!(rep.iterations <= 2, "{rep}");
    let dev = u
        .iter()
        .zip(v.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(
        dev <= 1e-8 * u.iter().fold(0.0f64, |m, x| m.max(x.abs())),
        "{dev}"
    );
}

#[test]
fn solution_minimizes_and_perturbation_raises_residual() {
    let mesh = disk_mesh(20, 0.8);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for spec in ["power:2", "power:3", "powerlog:1,1,1"] {
        let y = parse_young(spec).unwrap();
        let (p, u) = solved(&y, &mesh, Source::Const(1.0).nodal(&mesh));
        let eps = SolveOptions::default().epsilon(&mesh);
        let e0 = p.energy(&u, eps);
        let r0 = p.weak_residual(&u, eps);
        for _ in 0..5 {
            let d = random_field(&mesh, &mut rng);
            let w: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + 1e-2 * b).collect();
            assert!(p.energy(&w, eps) > e0, "{spec}");
            assert!(p.weak_residual(&w, eps) > r0, "{spec}");
        }
    }
}

#[test]
fn a_priori_and_stability_constants_hold_on_the_recorded_family() {
    let mesh = square_mesh(16);
    let loads = [(1.0, 0.0), (0.5, 1.5), (2.0, 2.0), (0.1, 1.0), (1.7, 0.3)];
    for spec in ["power:2", "power:3"] {
        let y = parse_young(spec).unwrap();
        let c_ap = recorded_a_priori_constant(spec, BOX).unwrap();
        let c_st = recorded_stability_constant(spec, BOX).unwrap();
        let sols: Vec<(Vec<f64>, Vec<f64>)> = loads
            .iter()
            .map(|&(a, b)| {
                let f = Source::X1Squared { a, b }.nodal(&mesh);
                let (_, u) = solved(&y, &mesh, f.clone());
                (f, u)
            })
            .collect();
        for (f, u) in &sols {
            assert!(a_priori_ratio(&y, &mesh, f, u) <= c_ap, "{spec}");
        }
        for i in 0..sols.len() {
            for j in 0..i {
                let r = stability_ratio(
                    &y,
                    &mesh,
                    (&sols[i].0, &sols[i].1),
                    (&sols[j].0, &sols[j].1),
                );
                assert!(r <= c_st, "{spec} {i} {j}: {r}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn weak_maximum_principle(sign in prop::bool::ANY, a in 0.0f64..2.0, b in 0.0f64..2.0) {
        prop_assume!(a + b > 1e-3);
        let mesh = disk_mesh(16, 0.9);
        let s = if sign { 1.0 } else { -1.0 };
        let f = Source::X1Squared { a: s * a, b: s * b }.nodal(&mesh);
        let (_, u) = solved(&YoungFunction::power(3.0).unwrap(), &mesh, f);
        prop_assert!(u.iter().all(|&v| s * v >= -1e-10));
    }

    #[test]
    fn comparison_principle(a in 0.0f64..2.0, b in 0.0f64..2.0, da in 0.0f64..1.0, db in 0.0f64..1.0) {
        let mesh = disk_mesh(16, 0.9);
        let y = YoungFunction::power(3.0).unwrap();
        let (_, u1) = solved(&y, &mesh, Source::X1Squared { a, b }.nodal(&mesh));
        let (_, u2) = solved(&y, &mesh, Source::X1Squared { a: a + da, b: b + db }.nodal(&mesh));
        prop_assert!(u1.iter().zip(&u2).all(|(x, y)| x <= &(y + 1e-6)));
    }

    #[test]
    fn domain_monotonicity(r in 0.3f64..0.7, dr in 0.05f64..0.3, cx in -0.1f64..0.1) {
        let g = Grid::square(16, BOX).unwrap();
        let small = DomainMask::rasterize(&Shape::disk(cx, 0.0, r), g);
        let big = DomainMask::rasterize(&Shape::disk(cx, 0.0, r + dr), g).or(&small).unwrap();
        let y = YoungFunction::power(3.0).unwrap();
        let ms = Arc::new(triangulate(&small).unwrap());
        let mb = Arc::new(triangulate(&big).unwrap());
        prop_assume!(ms.free_count() > 0);
        let (_, us) = solved(&y, &ms, vec![1.0; ms.n_nodes()]);
        let (_, ub) = solved(&y, &mb, vec![1.0; mb.n_nodes()]);
        for (node, &v) in us.iter().enumerate() {
            let l = ms.lattice_index(node);
            let w = mb.node_at_lattice(l).map_or(0.0, |k| ub[k]);
            prop_assert!(v <= w + 1e-6);
        }
    }

    #[test]
    fn scaling_of_power_solutions(c in 0.2f64..5.0) {
        // for Φ = t^p/p, f ↦ c·f maps u ↦ c^(1/(p−1))·u
        let mesh = disk_mesh(12, 0.9);
        let y = YoungFunction::power(3.0).unwrap();
        let (_, u1) = solved(&y, &mesh, vec![1.0; mesh.n_nodes()]);
        let (_, uc) = solved(&y, &mesh, vec![c; mesh.n_nodes()]);
        let s = c.sqrt();
        let top = u1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(u1.iter().zip(&uc).all(|(a, b)| (s * a - b).abs() <= 1e-6 * s * top));
    }
}
