//! Measured constants of the a priori and stability estimates.

use crate::geometry::Mesh;
use crate::orlicz::{luxemburg_norm, WeightedSamples};
use crate::young::YoungFunction;

/// Recorded `C̃` with `‖∇u‖_Φ <= C̃·‖f‖_{Φ*}^{1/p⁻}`, keyed by Young spec and
/// design box (full box domain). Measured at `h = 1/16` over the loads
/// `a + b·x₁²`, `0 <= a, b <= 2`, and recorded with a 25% margin.
pub const RECORDED_A_PRIORI: &[(&str, [f64; 4], f64)] = &[
    ("power:2", [-1.0, -1.0, 1.0, 1.0], A_PRIORI_P2),
    ("power:3", [-1.0, -1.0, 1.0, 1.0], A_PRIORI_P3),
];

/// Recorded `C` with `Σ Φ(|∇(u₁ − u₂)|) <= C·‖f₁ − f₂‖_{Φ*}` over the same
/// load family. The left side grows faster than the right under scaling, so
/// the constant only holds on that bounded family.
pub const RECORDED_STABILITY: &[(&str, [f64; 4], f64)] = &[
    ("power:2", [-1.0, -1.0, 1.0, 1.0], STABILITY_P2),
    ("power:3", [-1.0, -1.0, 1.0, 1.0], STABILITY_P3),
];

const A_PRIORI_P2: f64 = 0.47;
const A_PRIORI_P3: f64 = 0.60;
const STABILITY_P2: f64 = 0.53;
const STABILITY_P3: f64 = 0.18;

fn lookup(table: &[(&str, [f64; 4], f64)], young: &str, bbox: [f64; 4]) -> Option<f64> {
    table
        .iter()
        .find(|(y, b, _)| *y == young && *b == bbox)
        .map(|(_, _, c)| *c)
}

pub fn recorded_a_priori_constant(young: &str, bbox: [f64; 4]) -> Option<f64> {
    lookup(RECORDED_A_PRIORI, young, bbox)
}

pub fn recorded_stability_constant(young: &str, bbox: [f64; 4]) -> Option<f64> {
    lookup(RECORDED_STABILITY, young, bbox)
}

/// `‖f‖_{Φ*}` with the lumped masses.
pub fn load_norm(young: &YoungFunction, mesh: &Mesh, f: &[f64]) -> f64 {
    let s = WeightedSamples::new(f.to_vec(), mesh.lumped_mass().to_vec())
        .expect("lumped masses are positive");
    luxemburg_norm(&young.complementary(), &s)
}

/// `‖∇u‖_Φ` over the triangles.
pub fn gradient_norm(young: &YoungFunction, mesh: &Mesh, u: &[f64]) -> f64 {
    let g: Vec<f64> = (0..mesh.n_triangles())
        .map(|t| {
            let g = mesh.gradient(t, u);
            g[0].hypot(g[1])
        })
        .collect();
    let s = WeightedSamples::new(g, mesh.areas().to_vec()).expect("areas are positive");
    luxemburg_norm(young, &s)
}

/// `‖∇u‖_Φ / ‖f‖_{Φ*}^{1/p⁻}`.
pub fn a_priori_ratio(young: &YoungFunction, mesh: &Mesh, f: &[f64], u: &[f64]) -> f64 {
    let p_minus = young.indices().p_minus;
    gradient_norm(young, mesh, u) / load_norm(young, mesh, f).powf(1.0 / p_minus)
}

/// `Σ Φ(|∇(u₁ − u₂)|) / ‖f₁ − f₂‖_{Φ*}`.
pub fn stability_ratio(
    young: &YoungFunction,
    mesh: &Mesh,
    (f1, u1): (&[f64], &[f64]),
    (f2, u2): (&[f64], &[f64]),
) -> f64 {
    let df: Vec<f64> = f1.iter().zip(f2).map(|(a, b)| a - b).collect();
    let du: Vec<f64> = u1.iter().zip(u2).map(|(a, b)| a - b).collect();
    let modular: f64 = (0..mesh.n_triangles())
        .map(|t| {
            let g = mesh.gradient(t, &du);
            mesh.areas()[t] * young.big_phi(g[0].hypot(g[1]))
        })
        .sum();
    modular / load_norm(young, mesh, &df)
}
