use crate::numeric::refine_bracket;
use crate::sparse::{pcg, Csr, Preconditioner};

use super::problem::{DofSystem, Problem};
use super::{ConvergenceReport, Field, SolveError, SolveOptions};

const ARMIJO_C: f64 = 1e-4;
const MAX_HALVINGS: usize = 50;
const NEWTON_FAILURES_BEFORE_DESCENT: usize = 5;
const MU_MIN: f64 = 1e-10;
const MU_MAX: f64 = 1e6;
const CG_MAX_ITER: usize = 5000;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn trace(a: &Csr) -> f64 {
    a.diagonal().iter().sum()
}

struct State {
    u: Vec<f64>,
    energy: f64,
    grad: Vec<f64>,
    residual: f64,
}

impl State {
    fn at(problem: &Problem, u: Vec<f64>, eps: f64) -> Self {
        let energy = problem.energy(&u, eps);
        let grad = problem.gradient(&u, eps);
        let residual = problem.residual_of_gradient(&grad);
        Self {
            u,
            energy,
            grad,
            residual,
        }
    }
}

enum Step {
    Accepted { alpha: f64, next: State },
    Failed,
}

// Relative size of energy differences that roundoff cannot resolve.
const ENERGY_NOISE: f64 = 1e-11;

// Armijo backtracking along `dir` (free values only). When the predicted
// decrease is below the energy's roundoff level, the residual takes over as
// merit function.
fn line_search(
    problem: &Problem,
    sys: &DofSystem,
    state: &State,
    dir: &[f64],
    slope: f64,
    eps: f64,
) -> Step {
    let scale = state.energy.abs().max(problem.gradient_modular(&state.u)) + f64::MIN_POSITIVE;
    let noise = ENERGY_NOISE * scale;
    let resolvable = -slope >= noise;
    let mut alpha = 1.0;
    let mut trial = state.u.clone();
    for _ in 0..MAX_HALVINGS {
        for (d, &node) in sys.dofs.iter().enumerate() {
            trial[node] = state.u[node] + alpha * dir[d];
        }
        if resolvable {
            let e = problem.energy(&trial, eps);
            if e.is_finite() && e <= state.energy + ARMIJO_C * alpha * slope {
                return Step::Accepted {
                    alpha,
                    next: State::at(problem, trial, eps),
                };
            }
        } else {
            let next = State::at(problem, trial.clone(), eps);
            if next.energy <= state.energy + noise
                && next.residual < (1.0 - ARMIJO_C * alpha) * state.residual
            {
                return Step::Accepted { alpha, next };
            }
        }
        alpha *= 0.5;
    }
    Step::Failed
}

/// Linear warm start: solves the metric system with the constraint lift,
/// then rescales along the ray when the constraints are homogeneous.
fn warm_start(
    problem: &Problem,
    sys: &DofSystem,
    metric: &Csr,
    metric_pc: &Preconditioner,
    eps: f64,
) -> (Vec<f64>, usize) {
    let mut u = problem.lift();
    if sys.n() == 0 {
        return (u, 0);
    }
    // rhs = load − K·lift, read off as minus the p=2 gradient of the lift
    let mesh = problem.mesh();
    let mut rhs = vec![0.0; sys.n()];
    let m = mesh.lumped_mass();
    for (d, &node) in sys.dofs.iter().enumerate() {
        rhs[d] = m[node] * problem.source()[node];
    }
    for (t, &area) in mesh.areas().iter().enumerate() {
        let g = mesh.gradient(t, &u);
        if g == [0.0, 0.0] {
            continue;
        }
        let tri = &mesh.triangles()[t];
        let gr = mesh.basis_gradients(t);
        for k in 0..3 {
            let d = sys.dof_of[tri[k]];
            if d != super::problem::NONE {
                rhs[d] -= area * (g[0] * gr[k][0] + g[1] * gr[k][1]);
            }
        }
    }
    let mut w = vec![0.0; sys.n()];
    let rep = pcg(metric, &rhs, &mut w, metric_pc, 1e-10, CG_MAX_ITER);
    for (d, &node) in sys.dofs.iter().enumerate() {
        u[node] += w[d];
    }
    let homogeneous = problem.fixed().iter().all(|c| c.is_none_or(|v| v == 0.0));
    if homogeneous && w.iter().any(|&v| v != 0.0) {
        // minimize c ↦ E(c·u) through the sign change of its derivative
        let dphi = |c: f64| {
            let cu: Vec<f64> = u.iter().map(|v| c * v).collect();
            dot(&problem.gradient(&cu, eps), &u)
        };
        let d0 = dphi(0.0);
        // c = 1 already solves it in the linear case
        if d0 < 0.0 && dphi(1.0).abs() > 1e-10 * d0.abs() {
            let (mut lo, mut hi) = (0.0, 1.0);
            let mut guard = 0;
            while dphi(hi) < 0.0 && guard < 200 {
                lo = hi;
                hi *= 2.0;
                guard += 1;
            }
            let c = refine_bracket(&dphi, 0.0, lo, hi, 1e-6).unwrap_or(0.5 * (lo + hi));
            u.iter_mut().for_each(|v| *v *= c);
        }
    }
    (u, rep.iterations)
}

pub(crate) fn run(
    problem: &Problem,
    opts: &SolveOptions,
    initial: Option<&[f64]>,
) -> Result<(Field, ConvergenceReport), SolveError> {
    if problem.free_count() == 0 {
        return Err(SolveError::NoFreeNodes);
    }
    let eps = opts.epsilon(problem.mesh());
    let sys = DofSystem::new(problem);
    let metric = sys.metric(problem);
    let metric_pc = Preconditioner::build(&metric);
    let metric_trace = trace(&metric);

    let mut report = ConvergenceReport::default();
    let u0 = match initial {
        Some(u) => {
            problem.check_field(u)?;
            let mut u = u.to_vec();
            for (v, c) in u.iter_mut().zip(problem.fixed()) {
                if let Some(c) = c {
                    *v = *c;
                }
            }
            u
        }
        None => {
            let (u, cg) = warm_start(problem, &sys, &metric, &metric_pc, eps);
            report.cg_iterations += cg;
            u
        }
    };
    let mut state = State::at(problem, u0, eps);
    let residual_target = opts.tol_residual * (1.0 + problem.load_l1());
    let mut mu = 1e-6;
    let mut failures = 0usize;

    let finish = |state: State, mut report: ConvergenceReport, converged: bool| {
        report.energy = state.energy;
        report.residual = state.residual;
        report.converged = converged;
        let field = Field::new(problem.mesh().clone(), state.u);
        if converged {
            Ok((field, report))
        } else {
            Err(SolveError::NotConverged {
                field: Box::new(field),
                report,
            })
        }
    };

    if state.residual == 0.0 {
        return finish(state, report, true);
    }

    while report.iterations < opts.max_iterations {
        report.iterations += 1;
        let g: Vec<f64> = sys.gather(&state.grad);
        let use_descent = failures >= NEWTON_FAILURES_BEFORE_DESCENT;
        let dir = if use_descent {
            let mut d = vec![0.0; sys.n()];
            let neg: Vec<f64> = g.iter().map(|v| -v).collect();
            let rep = pcg(&metric, &neg, &mut d, &metric_pc, 1e-8, CG_MAX_ITER);
            report.cg_iterations += rep.iterations;
            d
        } else {
            let mut a = sys.hessian(problem, &state.u, eps);
            let c_bar = (trace(&a) / metric_trace).max(f64::MIN_POSITIVE);
            a.add_scaled(mu * c_bar, &metric);
            let pc = Preconditioner::build(&a);
            let neg: Vec<f64> = g.iter().map(|v| -v).collect();
            let mut eta: f64 = if state.residual > 1e3 * opts.tol_residual {
                1e-4
            } else {
                1e-10
            };
            // no need to resolve the step far below the residual target
            let g_norm = dot(&g, &g).sqrt();
            if g_norm > 0.0 {
                eta = eta.max((1e-3 * residual_target / g_norm).min(0.5));
            }
            let mut d = vec![0.0; sys.n()];
            let rep = pcg(&a, &neg, &mut d, &pc, eta, CG_MAX_ITER);
            report.cg_iterations += rep.iterations;
            if !rep.converged && !(rep.relative_residual < 0.5) {
                failures += 1;
                mu = (mu * 100.0).clamp(1e-4, MU_MAX);
                continue;
            }
            d
        };
        let slope = dot(&g, &dir);
        if !(slope < 0.0) {
            if use_descent {
                let converged = state.residual < opts.tol_residual;
                return finish(state, report, converged);
            }
            failures += 1;
            mu = (mu * 100.0).clamp(1e-4, MU_MAX);
            continue;
        }
        match line_search(problem, &sys, &state, &dir, slope, eps) {
            Step::Accepted { alpha, next } => {
                failures = 0;
                if use_descent {
                    report.gradient_steps += 1;
                } else {
                    report.newton_steps += 1;
                    mu = if alpha == 1.0 {
                        (mu * 0.1).max(MU_MIN)
                    } else {
                        (mu * 4.0).min(MU_MAX)
                    };
                }
                let prev = state.energy;
                state = next;
                let scale = state.energy.abs().max(prev.abs()).max(f64::MIN_POSITIVE);
                let rel_dec = (prev - state.energy) / scale;
                if rel_dec < opts.tol_energy && state.residual < opts.tol_residual {
                    return finish(state, report, true);
                }
            }
            Step::Failed => {
                if state.residual < opts.tol_residual {
                    return finish(state, report, true);
                }
                if use_descent {
                    return finish(state, report, false);
                }
                failures += 1;
                mu = (mu * 100.0).clamp(1e-4, MU_MAX);
            }
        }
    }
    finish(state, report, false)
}
