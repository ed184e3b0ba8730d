//! Dirichlet problem `−Δ_φ u + d φ(|u|) = f` on a P1 mesh, solved by
//! minimizing the discrete energy with a damped Newton method.

pub mod bounds;
mod newton;
mod problem;

use std::fmt::{self, Write as _};
use std::sync::Arc;

use thiserror::Error;

use crate::geometry::Mesh;
use crate::young::YoungError;

pub(crate) use problem::DofSystem;
pub use problem::Problem;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("mesh has no free nodes")]
    NoFreeNodes,
    #[error("no convergence after {} iterations (residual {:.3e})", report.iterations, report.residual)]
    NotConverged {
        field: Box<Field>,
        report: ConvergenceReport,
    },
    #[error(transparent)]
    Young(#[from] YoungError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Gradient regularization `ε`, relative to the design-box diameter.
    pub grad_regularization: f64,
    /// Relative energy decrease below which an iteration counts as stalled.
    pub tol_energy: f64,
    /// Bound on the normalized weak residual.
    pub tol_residual: f64,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            grad_regularization: 1e-8,
            tol_energy: 1e-10,
            tol_residual: 1e-8,
            max_iterations: 200,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<(), SolveError> {
        let ok = self.grad_regularization >= 0.0
            && self.grad_regularization.is_finite()
            && self.tol_energy > 0.0
            && self.tol_residual > 0.0
            && self.max_iterations > 0;
        if ok {
            Ok(())
        } else {
            Err(SolveError::InvalidInput(format!(
                "invalid solver options {self:?}"
            )))
        }
    }

    /// Absolute `ε` on a given mesh.
    pub fn epsilon(&self, mesh: &Mesh) -> f64 {
        self.grad_regularization * mesh.grid().diameter()
    }
}

/// Nodal values of a P1 function.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Self {
        assert_eq!(mesh.n_nodes(), values.len(), "one value per node");
        Self { mesh, values }
    }

    pub fn zeros(mesh: Arc<Mesh>) -> Self {
        let n = mesh.n_nodes();
        Self::new(mesh, vec![0.0; n])
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v))
    }

    /// One line `x y value` per node.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 48);
        for (p, v) in self.mesh.nodes().iter().zip(&self.values) {
            let _ = writeln!(out, "{:?} {:?} {:?}", p[0], p[1], v);
        }
        out
    }
}

/// Parses the `x y value` field format.
pub fn parse_field_text(text: &str) -> Result<Vec<[f64; 3]>, SolveError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(n, line)| {
            let v: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|e| SolveError::InvalidInput(format!("field line {}: {e}", n + 1)))?;
            match v.as_slice() {
                [x, y, u] => Ok([*x, *y, *u]),
                _ => Err(SolveError::InvalidInput(format!(
                    "field line {} has {} columns",
                    n + 1,
                    v.len()
                ))),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceReport {
    pub iterations: usize,
    pub newton_steps: usize,
    pub gradient_steps: usize,
    pub cg_iterations: usize,
    pub energy: f64,
    pub residual: f64,
    pub converged: bool,
}

impl fmt::Display for ConvergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "converged {}", self.converged)?;
        writeln!(f, "iterations {}", self.iterations)?;
        writeln!(f, "newton_steps {}", self.newton_steps)?;
        writeln!(f, "gradient_steps {}", self.gradient_steps)?;
        writeln!(f, "cg_iterations {}", self.cg_iterations)?;
        writeln!(f, "energy {:?}", self.energy)?;
        writeln!(f, "residual {:?}", self.residual)
    }
}

impl ConvergenceReport {
    pub fn from_text(text: &str) -> Result<Self, SolveError> {
        let mut r = ConvergenceReport::default();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once(' ')
                .ok_or_else(|| SolveError::InvalidInput(format!("bad report line {line:?}")))?;
            let bad = |e: &dyn fmt::Display| SolveError::InvalidInput(format!("{k}: {e}"));
            let int = |v: &str| v.trim().parse::<usize>().map_err(|e| bad(&e));
            let real = |v: &str| v.trim().parse::<f64>().map_err(|e| bad(&e));
            match k {
                "converged" => r.converged = v.trim().parse().map_err(|e| bad(&e))?,
                "iterations" => r.iterations = int(v)?,
                "newton_steps" => r.newton_steps = int(v)?,
                "gradient_steps" => r.gradient_steps = int(v)?,
                "cg_iterations" => r.cg_iterations = int(v)?,
                "energy" => r.energy = real(v)?,
                "residual" => r.residual = real(v)?,
                other => {
                    return Err(SolveError::InvalidInput(format!(
                        "unknown report key {other:?}"
                    )))
                }
            }
        }
        Ok(r)
    }
}

/// Minimizes the energy of `problem`, starting from a linear warm start.
pub fn solve(
    problem: &Problem,
    opts: &SolveOptions,
) -> Result<(Field, ConvergenceReport), SolveError> {
    opts.validate()?;
    newton::run(problem, opts, None)
}

/// Like [`solve`], from a given initial field (fixed values are overwritten).
pub fn solve_from(
    problem: &Problem,
    opts: &SolveOptions,
    initial: &[f64],
) -> Result<(Field, ConvergenceReport), SolveError> {
    opts.validate()?;
    newton::run(problem, opts, Some(initial))
}

/// Right-hand sides given by formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Source {
    /// `f ≡ c`.
    Const(f64),
    /// `f(x) = a + b·x₁²`.
    X1Squared { a: f64, b: f64 },
}

impl Source {
    pub fn eval(&self, p: [f64; 2]) -> f64 {
        match *self {
            Source::Const(c) => c,
            Source::X1Squared { a, b } => a + b * p[0] * p[0],
        }
    }

    pub fn nodal(&self, mesh: &Mesh) -> Vec<f64> {
        mesh.nodes().iter().map(|&p| self.eval(p)).collect()
    }

    pub fn scaled(&self, c: f64) -> Source {
        match *self {
            Source::Const(v) => Source::Const(c * v),
            Source::X1Squared { a, b } => Source::X1Squared { a: c * a, b: c * b },
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Const(c) => write!(f, "const:{c}"),
            Source::X1Squared { a, b } => write!(f, "x1sq:{a},{b}"),
        }
    }
}

/// Parses `const:c` or `x1sq:a,b`.
pub fn parse_source(spec: &str) -> Result<Source, SolveError> {
    let bad = |why: String| SolveError::InvalidInput(format!("source {spec:?}: {why}"));
    let (name, body) = spec
        .trim()
        .split_once(':')
        .ok_or_else(|| bad("missing ':'".into()))?;
    let v: Vec<f64> = body
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| bad(e.to_string()))?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(bad("non-finite coefficient".into()));
    }
    match (name.trim(), v.as_slice()) {
        ("const", [c]) => Ok(Source::Const(*c)),
        ("x1sq", [a, b]) => Ok(Source::X1Squared { a: *a, b: *b }),
        (other, _) => Err(bad(format!("unknown form {other:?} or wrong arity"))),
    }
}
