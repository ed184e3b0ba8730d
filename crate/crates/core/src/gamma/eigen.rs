use std::sync::Arc;

use crate::geometry::Mesh;
use crate::numeric::{invert_increasing, refine_bracket};
use crate::solver::{DofSystem, Field, Problem, SolveOptions};
use crate::sparse::{pcg, Preconditioner};
use crate::young::YoungFunction;

use super::GammaError;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenOptions {
    pub max_iterations: usize,
    /// Stop once the quotient changes by less than this, relative.
    pub rel_tol: f64,
    /// Stop once the projected gradient, in the `K⁻¹` norm and relative to
    /// the gradient of the numerator, falls below this.
    pub residual_tol: f64,
    pub grad_regularization: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            rel_tol: 1e-13,
            residual_tol: 1e-9,
            grad_regularization: SolveOptions::default().grad_regularization,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenResult {
    /// `∫Φ(|∇u|) / ∫Φ(|u|)` at the minimizer, where `∫Φ(|u|) = μ`.
    pub lambda: f64,
    pub field: Field,
    pub iterations: usize,
    pub residual: f64,
}

const CG_TOL: f64 = 1e-12;
const CG_MAX_ITER: usize = 5000;
const MAX_HALVINGS: usize = 40;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Quotient<'a> {
    problem: Problem,
    sys: DofSystem,
    young: &'a YoungFunction,
    mass: Vec<f64>,
    eps: f64,
}

impl Quotient<'_> {
    // ∫Φ(|u|) on the free values
    fn modular(&self, v: &[f64]) -> f64 {
        v.iter()
            .zip(&self.mass)
            .map(|(x, m)| m * self.young.big_phi(x.abs()))
            .sum()
    }

    fn modular_grad(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .zip(&self.mass)
            .map(|(x, m)| m * self.young.phi(x.abs()) * x.signum())
            .collect()
    }

    fn full(&self, v: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.problem.mesh().n_nodes()];
        for (d, &node) in self.sys.dofs.iter().enumerate() {
            u[node] = v[d];
        }
        u
    }

    fn numerator(&self, v: &[f64]) -> f64 {
        self.problem.gradient_modular(&self.full(v))
    }

    fn numerator_grad(&self, v: &[f64]) -> Vec<f64> {
        self.sys
            .gather(&self.problem.gradient(&self.full(v), self.eps))
    }

    /// `c·v` with `∫Φ(|c v|) = μ`; the (Φ₁) bounds bracket `c`.
    fn rescale(&self, v: &[f64], mu: f64) -> Vec<f64> {
        let m = self.modular(v);
        let ix = self.young.indices();
        let r = mu / m;
        let a = r.powf(1.0 / (ix.p_minus + 1.0));
        let b = r.powf(1.0 / (ix.p_plus + 1.0));
        let (lo, hi) = (a.min(b) * (1.0 - 1e-9), a.max(b) * (1.0 + 1e-9));
        let g = |c: f64| self.modular(&v.iter().map(|x| c * x).collect::<Vec<_>>());
        let c = refine_bracket(&g, mu, lo, hi, 1e-15)
            .or_else(|_| invert_increasing(g, mu, 0.5 * (lo + hi), 1e-15))
            .unwrap_or(0.5 * (lo + hi));
        v.iter().map(|x| c * x).collect()
    }
}

/// Minimizes `∫Φ(|∇u|)` over zero-trace fields with `∫Φ(|u|) = μ` by
/// `K⁻¹`-preconditioned descent on the constraint manifold, where `K` is the
/// P1 stiffness matrix. Each step projects the preconditioned gradient onto
/// the tangent space and then rescales back onto the constraint.
pub fn estimate_lambda_variational(
    mesh: Arc<Mesh>,
    young: &YoungFunction,
    mu: f64,
    opts: &EigenOptions,
) -> Result<EigenResult, GammaError> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(GammaError::InvalidInput(format!(
            "mu must be positive, got {mu}"
        )));
    }
    if mesh.free_count() == 0 {
        return Err(GammaError::InvalidInput("mesh has no free nodes".into()));
    }
    let n = mesh.n_nodes();
    let problem = Problem::new(young.clone(), mesh.clone(), vec![0.0; n])
        .map_err(|e| GammaError::InvalidInput(e.to_string()))?;
    let sys = DofSystem::new(&problem);
    let k = sys.metric(&problem);
    let pc = Preconditioner::build(&k);
    let mass = sys.gather(mesh.lumped_mass());
    let q = Quotient {
        eps: opts.grad_regularization * mesh.grid().diameter(),
        problem,
        sys,
        young,
        mass,
    };
    let solve_k = |b: &[f64]| {
        let mut x = vec![0.0; b.len()];
        pcg(&k, b, &mut x, &pc, CG_TOL, CG_MAX_ITER);
        x
    };

    // positive start: the linear torsion function
    let mut v = q.rescale(&solve_k(&q.mass), mu);
    let mut lambda = q.numerator(&v) / mu;
    for it in 1..=opts.max_iterations {
        let g_num = q.numerator_grad(&v);
        let g_con = q.modular_grad(&v);
        let z_num = solve_k(&g_num);
        let z_con = solve_k(&g_con);
        let mult = dot(&z_num, &g_con) / dot(&z_con, &g_con);
        let dir: Vec<f64> = z_num
            .iter()
            .zip(&z_con)
            .map(|(a, b)| mult * b - a)
            .collect();
        // ‖g_num − mult·g_con‖ in the K⁻¹ norm, relative to ‖g_num‖
        let proj = -dot(&dir, &g_num) + mult * dot(&dir, &g_con);
        let residual = (proj.max(0.0) / dot(&z_num, &g_num).max(f64::MIN_POSITIVE)).sqrt();
        if residual < opts.residual_tol {
            return Ok(finish(&q, v, it, residual));
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = v.iter().zip(&dir).map(|(x, d)| x + alpha * d).collect();
            let trial = q.rescale(&trial, mu);
            let l = q.numerator(&trial) / mu;
            if l < lambda {
                accepted = Some((trial, l));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((trial, l)) => {
                let change = (lambda - l) / l;
                v = trial;
                lambda = l;
                if change < opts.rel_tol {
                    return Ok(finish(&q, v, it, residual));
                }
            }
            // no decrease left at roundoff level
            None if residual < 1e-6 => return Ok(finish(&q, v, it, residual)),
            None => return Err(GammaError::EigenNotConverged { last: lambda }),
        }
    }
    Err(GammaError::EigenNotConverged { last: lambda })
}

fn finish(q: &Quotient<'_>, v: Vec<f64>, iterations: usize, residual: f64) -> EigenResult {
    let m = q.modular(&v);
    let lambda = q.numerator(&v) / m;
    EigenResult {
        lambda,
        field: Field::new(q.problem.mesh().clone(), q.full(&v)),
        iterations,
        residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{triangulate, DomainMask, Grid};

    #[test]
    fn unit_square_linear_eigenvalue() {
        // first Dirichlet eigenvalue of the unit square is 2π²
        let g = Grid::square(32, [0.0, 0.0, 1.0, 1.0]).unwrap();
        let mesh = Arc::new(triangulate(&DomainMask::full(g)).unwrap());
        let y = YoungFunction::power(2.0).unwrap();
        let r = estimate_lambda_variational(mesh, &y, 1.0, &EigenOptions::default()).unwrap();
        let exact = 2.0 * std::f64::consts::PI.powi(2);
        assert!((r.lambda / exact - 1.0).abs() < 0.02, "{}", r.lambda);
        assert!(r.field.values().iter().all(|&v| v >= -1e-12));
    }

    #[test]
    fn rejects_bad_mu() {
        let g = Grid::square(4, [0.0, 0.0, 1.0, 1.0]).unwrap();
        let mesh = Arc::new(triangulate(&DomainMask::full(g)).unwrap());
        let y = YoungFunction::power(2.0).unwrap();
        assert!(estimate_lambda_variational(mesh, &y, 0.0, &EigenOptions::default()).is_err());
    }
}
