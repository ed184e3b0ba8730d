//! Relative and Sobolev Φ-capacities by constrained energy minimization.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::geometry::{triangulate, DomainMask, GeometryError, Grid, Mesh};
use crate::solver::{solve, Field, Problem, SolveError, SolveOptions};
use crate::young::YoungFunction;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CapacityError {
    #[error("obstacle is not contained in the environment")]
    ObstacleOutside,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityMode {
    /// `inf Σ Φ(|∇u|)` with `u = 1` on the obstacle and zero trace on the
    /// environment boundary.
    Relative,
    /// `inf Σ Φ(|u|) + Φ(|∇u|)` with `u = 1` near the obstacle, free elsewhere.
    Sobolev,
}

#[derive(Debug, Clone)]
pub struct CapacityProblem {
    pub obstacle: DomainMask,
    pub environment: DomainMask,
    pub young: YoungFunction,
    pub mode: CapacityMode,
}

#[derive(Debug, Clone)]
pub struct CapacityResult {
    pub capacity: f64,
    pub iterations: usize,
    pub residual: f64,
    /// Minimizing potential; `None` for an empty obstacle.
    pub potential: Option<Field>,
}

impl fmt::Display for CapacityResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "capacity {:?} iterations {} residual {:?}",
            self.capacity, self.iterations, self.residual
        )
    }
}

impl CapacityResult {
    fn zero() -> Self {
        Self {
            capacity: 0.0,
            iterations: 0,
            residual: 0.0,
            potential: None,
        }
    }

    /// Parses the one-line form written by `Display`.
    pub fn parse_line(line: &str) -> Option<(f64, usize, f64)> {
        let w: Vec<&str> = line.split_whitespace().collect();
        match w.as_slice() {
            ["capacity", c, "iterations", n, "residual", r] => {
                Some((c.parse().ok()?, n.parse().ok()?, r.parse().ok()?))
            }
            _ => None,
        }
    }
}

impl CapacityProblem {
    pub fn relative(obstacle: DomainMask, environment: DomainMask, young: YoungFunction) -> Self {
        Self {
            obstacle,
            environment,
            young,
            mode: CapacityMode::Relative,
        }
    }

    pub fn sobolev(obstacle: DomainMask, environment: DomainMask, young: YoungFunction) -> Self {
        Self {
            obstacle,
            environment,
            young,
            mode: CapacityMode::Sobolev,
        }
    }

    fn validate(&self) -> Result<(), CapacityError> {
        if !self.obstacle.is_subset_of(&self.environment)? {
            return Err(CapacityError::ObstacleOutside);
        }
        Ok(())
    }

    pub fn solve(&self, opts: &SolveOptions) -> Result<CapacityResult, CapacityError> {
        match self.mode {
            CapacityMode::Relative => relative_capacity(self, opts),
            CapacityMode::Sobolev => sobolev_capacity(self, opts),
        }
    }
}

// Lattice corners of the true cells of `mask`.
fn corner_nodes(mask: &DomainMask, mesh: &Mesh) -> Vec<usize> {
    let g = mask.grid();
    let mut nodes = Vec::new();
    for j in 0..g.ny {
        for i in 0..g.nx {
            if mask.get(i, j) {
                for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                    if let Some(n) = mesh.node_at(i + di, j + dj) {
                        nodes.push(n);
                    }
                }
            }
        }
    }
    nodes.sort_unstable();
    nodes.dedup();
    nodes
}

fn finish(
    problem: &Problem,
    field: Field,
    iterations: usize,
    residual: f64,
    with_zero_order: bool,
) -> CapacityResult {
    let u = field.values();
    let mut capacity = problem.gradient_modular(u);
    if with_zero_order {
        let m = problem.mesh().lumped_mass();
        let y = problem.young();
        capacity += u
            .iter()
            .zip(m)
            .map(|(v, m)| m * y.big_phi(v.abs()))
            .sum::<f64>();
    }
    CapacityResult {
        capacity,
        iterations,
        residual,
        potential: Some(field),
    }
}

/// Relative capacity of the obstacle in the environment. Nodes that are both
/// on the obstacle and on the environment boundary are held at zero.
pub fn relative_capacity(
    p: &CapacityProblem,
    opts: &SolveOptions,
) -> Result<CapacityResult, CapacityError> {
    p.validate()?;
    if p.obstacle.is_empty() {
        return Ok(CapacityResult::zero());
    }
    let mesh = Arc::new(triangulate(&p.environment)?);
    let n = mesh.n_nodes();
    let mut problem = Problem::new(p.young.clone(), mesh.clone(), vec![0.0; n])?;
    let dirichlet = mesh.dirichlet().to_vec();
    for node in corner_nodes(&p.obstacle, &mesh) {
        if !dirichlet[node] {
            problem.fix(node, 1.0);
        }
    }
    if problem.fixed().iter().all(|c| c.is_none_or(|v| v == 0.0)) {
        // the obstacle touches only boundary nodes
        return Ok(CapacityResult::zero());
    }
    if problem.free_count() == 0 {
        let u = problem.lift();
        let field = Field::new(mesh.clone(), u);
        return Ok(finish(&problem, field, 0, 0.0, false));
    }
    let (field, rep) = solve(&problem, opts)?;
    Ok(finish(&problem, field, rep.iterations, rep.residual, false))
}

/// Lower bound on the padding of the Sobolev-capacity box. The zero-order
/// term screens the potential on a unit length scale, so padding by the
/// obstacle diameter alone badly truncates small obstacles.
pub const SOBOLEV_MIN_PAD: f64 = 2.0;

/// Sobolev capacity on a box around the obstacle, padded on every side by
/// `max(diameter, SOBOLEV_MIN_PAD)`, with natural boundary conditions. The
/// constraint `u = 1` holds on the obstacle dilated by one cell.
pub fn sobolev_capacity(
    p: &CapacityProblem,
    opts: &SolveOptions,
) -> Result<CapacityResult, CapacityError> {
    p.validate()?;
    if p.obstacle.is_empty() {
        return Ok(CapacityResult::zero());
    }
    let g = *p.obstacle.grid();
    let (mut i0, mut j0, mut i1, mut j1) = (usize::MAX, usize::MAX, 0, 0);
    for j in 0..g.ny {
        for i in 0..g.nx {
            if p.obstacle.get(i, j) {
                i0 = i0.min(i);
                j0 = j0.min(j);
                i1 = i1.max(i + 1);
                j1 = j1.max(j + 1);
            }
        }
    }
    let diam = ((i1 - i0) as f64 * g.hx()).hypot((j1 - j0) as f64 * g.hy());
    let pad = diam.max(SOBOLEV_MIN_PAD);
    let pad_i = (pad / g.hx()).ceil() as usize + 2;
    let pad_j = (pad / g.hy()).ceil() as usize + 2;
    let nx = (i1 - i0) + 2 * pad_i;
    let ny = (j1 - j0) + 2 * pad_j;
    let origin = g.lattice_point(i0, j0);
    let bbox = [
        origin[0] - pad_i as f64 * g.hx(),
        origin[1] - pad_j as f64 * g.hy(),
        origin[0] + (i1 - i0 + pad_i) as f64 * g.hx(),
        origin[1] + (j1 - j0 + pad_j) as f64 * g.hy(),
    ];
    let big = Grid::new(nx, ny, bbox)?;
    let mesh = Arc::new(triangulate(&DomainMask::full(big))?);
    let n = mesh.n_nodes();
    let mut problem = Problem::new(p.young.clone(), mesh.clone(), vec![0.0; n])?
        .with_natural_boundary()
        .with_zero_order(vec![1.0; n])?;
    // obstacle cell (i, j) sits at (i - i0 + pad_i, j - j0 + pad_j) in the big grid
    let mut dilated = DomainMask::empty(big);
    for j in j0..j1 {
        for i in i0..i1 {
            if p.obstacle.get(i, j) {
                let (bi, bj) = (i - i0 + pad_i, j - j0 + pad_j);
                for dj in -1isize..=1 {
                    for di in -1isize..=1 {
                        dilated.set(
                            (bi as isize + di) as usize,
                            (bj as isize + dj) as usize,
                            true,
                        );
                    }
                }
            }
        }
    }
    for node in corner_nodes(&dilated, &mesh) {
        problem.fix(node, 1.0);
    }
    let (field, rep) = solve(&problem, opts)?;
    Ok(finish(&problem, field, rep.iterations, rep.residual, true))
}

/// Relative capacity of `Ω_k ∖ Ω` inside the design box.
pub fn hypothesis_capacity(
    omega_k: &DomainMask,
    omega: &DomainMask,
    design_box: &DomainMask,
    young: &YoungFunction,
    opts: &SolveOptions,
) -> Result<CapacityResult, CapacityError> {
    omega_k.grid().check_same(omega.grid())?;
    omega_k.grid().check_same(design_box.grid())?;
    let diff = omega_k.and_not(omega)?;
    if diff.is_empty() {
        return Ok(CapacityResult::zero());
    }
    relative_capacity(
        &CapacityProblem::relative(diff, design_box.clone(), young.clone()),
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Shape;

    fn grid(n: usize) -> Grid {
        Grid::square(n, [-0.5, -0.5, 0.5, 0.5]).unwrap()
    }

    #[test]
    fn empty_obstacle_has_zero_capacity() {
        let g = grid(16);
        let env = DomainMask::full(g);
        let y = YoungFunction::power(2.0).unwrap();
        let opts = SolveOptions::default();
        let r = CapacityProblem::relative(DomainMask::empty(g), env.clone(), y.clone())
            .solve(&opts)
            .unwrap();
        assert_eq!(r.capacity, 0.0);
        let r = CapacityProblem::sobolev(DomainMask::empty(g), env, y)
            .solve(&opts)
            .unwrap();
        assert_eq!(r.capacity, 0.0);
    }

    #[test]
    fn obstacle_outside_is_rejected() {
        let g = grid(16);
        let env = DomainMask::rasterize(&Shape::disk(0.0, 0.0, 0.2), g);
        let obs = DomainMask::rasterize(&Shape::disk(0.3, 0.3, 0.1), g);
        let y = YoungFunction::power(2.0).unwrap();
        assert!(matches!(
            relative_capacity(
                &CapacityProblem::relative(obs, env, y),
                &SolveOptions::default()
            ),
            Err(CapacityError::ObstacleOutside)
        ));
    }

    #[test]
    fn potential_is_between_zero_and_one() {
        let g = grid(48);
        let env = DomainMask::rasterize(&Shape::disk(0.0, 0.0, 0.45), g);
        let obs = DomainMask::rasterize(&Shape::disk(0.05, 0.0, 0.1), g);
        let y = YoungFunction::power(3.0).unwrap();
        let r = relative_capacity(
            &CapacityProblem::relative(obs, env, y),
            &SolveOptions::default(),
        )
        .unwrap();
        let u = r.potential.as_ref().unwrap();
        assert!(u
            .values()
            .iter()
            .all(|&v| (-1e-8..=1.0 + 1e-8).contains(&v)));
        assert!(r.capacity > 0.0);
        let line = CapacityResult {
            potential: None,
            ..r.clone()
        }
        .to_string();
        let (c, _, _) = CapacityResult::parse_line(&line).unwrap();
        assert_eq!(c, r.capacity);
    }

    #[test]
    fn sobolev_capacity_is_positive_and_bounded() {
        let g = grid(32);
        let env = DomainMask::full(g);
        let obs = DomainMask::rasterize(&Shape::disk(0.0, 0.0, 0.1), g);
        let y = YoungFunction::power(2.0).unwrap();
        let r = sobolev_capacity(
            &CapacityProblem::sobolev(obs.clone(), env, y),
            &SolveOptions::default(),
        )
        .unwrap();
        // u ≡ 1 on the dilated obstacle alone already costs its area·Φ(1)
        assert!(r.capacity > obs.area() * 0.5);
        let u = r.potential.unwrap();
        assert!(u
            .values()
            .iter()
            .all(|&v| (-1e-8..=1.0 + 1e-8).contains(&v)));
    }
}
