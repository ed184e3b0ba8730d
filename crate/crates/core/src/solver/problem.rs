use std::sync::Arc;

use crate::geometry::Mesh;
use crate::sparse::Csr;
use crate::young::YoungFunction;

use super::SolveError;

/// Discrete energy `Σ_T |T| Φ(|∇u|_ε) − Σ_i m_i f_i u_i + Σ_i m_i d_i Φ(|u_i|)`
/// on a P1 mesh, with prescribed values on fixed nodes.
///
/// The gradient term is exact for P1 fields; the load and zero-order terms
/// use vertex quadrature, i.e. the lumped masses `m_i`.
#[derive(Debug, Clone)]
pub struct Problem {
    young: YoungFunction,
    mesh: Arc<Mesh>,
    f: Vec<f64>,
    zero_order: Option<Vec<f64>>,
    fixed: Vec<Option<f64>>,
}

impl Problem {
    /// Homogeneous Dirichlet problem: every boundary node is fixed to zero.
    pub fn new(young: YoungFunction, mesh: Arc<Mesh>, f: Vec<f64>) -> Result<Self, SolveError> {
        if f.len() != mesh.n_nodes() {
            return Err(SolveError::InvalidInput(format!(
                "source has {} values for {} nodes",
                f.len(),
                mesh.n_nodes()
            )));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(SolveError::InvalidInput("source is not finite".into()));
        }
        let fixed = mesh
            .dirichlet()
            .iter()
            .map(|&d| if d { Some(0.0) } else { None })
            .collect();
        Ok(Self {
            young,
            mesh,
            f,
            zero_order: None,
            fixed,
        })
    }

    pub fn with_zero_order(mut self, d: Vec<f64>) -> Result<Self, SolveError> {
        if d.len() != self.mesh.n_nodes() {
            return Err(SolveError::InvalidInput(format!(
                "zero-order coefficient has {} values for {} nodes",
                d.len(),
                self.mesh.n_nodes()
            )));
        }
        if d.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(SolveError::InvalidInput(
                "zero-order coefficient must be finite and nonnegative".into(),
            ));
        }
        self.zero_order = Some(d);
        Ok(self)
    }

    /// Releases every boundary constraint (natural boundary conditions).
    pub fn with_natural_boundary(mut self) -> Self {
        self.fixed.iter_mut().for_each(|c| *c = None);
        self
    }

    /// Prescribes `u = value` at `node`.
    pub fn fix(&mut self, node: usize, value: f64) {
        self.fixed[node] = Some(value);
    }

    pub fn young(&self) -> &YoungFunction {
        &self.young
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn source(&self) -> &[f64] {
        &self.f
    }

    pub fn zero_order(&self) -> Option<&[f64]> {
        self.zero_order.as_deref()
    }

    pub fn fixed(&self) -> &[Option<f64>] {
        &self.fixed
    }

    pub fn free_count(&self) -> usize {
        self.fixed.iter().filter(|c| c.is_none()).count()
    }

    /// A field equal to the prescribed values on fixed nodes and 0 elsewhere.
    pub fn lift(&self) -> Vec<f64> {
        self.fixed.iter().map(|c| c.unwrap_or(0.0)).collect()
    }

    pub fn check_field(&self, u: &[f64]) -> Result<(), SolveError> {
        if u.len() != self.mesh.n_nodes() {
            return Err(SolveError::InvalidInput(format!(
                "field has {} values for {} nodes",
                u.len(),
                self.mesh.n_nodes()
            )));
        }
        Ok(())
    }

    /// `∫|f|` with the lumped masses.
    pub fn load_l1(&self) -> f64 {
        self.f
            .iter()
            .zip(self.mesh.lumped_mass())
            .map(|(f, m)| f.abs() * m)
            .sum()
    }

    /// Regularized energy; shifted by `Φ(ε)` per unit area so that `u ≡ 0` has energy 0.
    pub fn energy(&self, u: &[f64], eps: f64) -> f64 {
        let mesh = &*self.mesh;
        let y = &self.young;
        let base = y.big_phi(eps);
        let mut e = 0.0;
        for (t, &area) in mesh.areas().iter().enumerate() {
            let g = mesh.gradient(t, u);
            let s = (g[0] * g[0] + g[1] * g[1] + eps * eps).sqrt();
            e += area * (y.big_phi(s) - base);
        }
        let m = mesh.lumped_mass();
        for i in 0..u.len() {
            e -= m[i] * self.f[i] * u[i];
        }
        if let Some(d) = &self.zero_order {
            for i in 0..u.len() {
                if d[i] != 0.0 && u[i] != 0.0 {
                    e += m[i] * d[i] * y.big_phi(u[i].abs());
                }
            }
        }
        e
    }

    /// Energy split into the gradient modular `Σ|T|Φ(|∇u|)` (unregularized)
    /// and the remaining terms.
    pub fn gradient_modular(&self, u: &[f64]) -> f64 {
        let mesh = &*self.mesh;
        mesh.areas()
            .iter()
            .enumerate()
            .map(|(t, &area)| {
                let g = mesh.gradient(t, u);
                area * self.young.big_phi(g[0].hypot(g[1]))
            })
            .sum()
    }

    /// Derivative of the energy with respect to every nodal value
    /// (fixed nodes included).
    pub fn gradient(&self, u: &[f64], eps: f64) -> Vec<f64> {
        let mesh = &*self.mesh;
        let y = &self.young;
        let mut out = vec![0.0; u.len()];
        for (t, &area) in mesh.areas().iter().enumerate() {
            let g = mesh.gradient(t, u);
            let s = (g[0] * g[0] + g[1] * g[1] + eps * eps).sqrt();
            if s == 0.0 {
                continue;
            }
            let a = area * y.phi(s) / s;
            let tri = &mesh.triangles()[t];
            let gr = mesh.basis_gradients(t);
            for k in 0..3 {
                out[tri[k]] += a * (g[0] * gr[k][0] + g[1] * gr[k][1]);
            }
        }
        let m = mesh.lumped_mass();
        for i in 0..u.len() {
            out[i] -= m[i] * self.f[i];
        }
        if let Some(d) = &self.zero_order {
            for i in 0..u.len() {
                if d[i] != 0.0 && u[i] != 0.0 {
                    out[i] += m[i] * d[i] * y.phi(u[i].abs()) * u[i].signum();
                }
            }
        }
        out
    }

    /// `max_{free i} |∂E/∂u_i| / (1 + ∫|f|)`.
    pub fn weak_residual(&self, u: &[f64], eps: f64) -> f64 {
        let g = self.gradient(u, eps);
        self.residual_of_gradient(&g)
    }

    pub(crate) fn residual_of_gradient(&self, g: &[f64]) -> f64 {
        let worst = g
            .iter()
            .zip(&self.fixed)
            .filter(|(_, c)| c.is_none())
            .fold(0.0f64, |m, (v, _)| m.max(v.abs()));
        worst / (1.0 + self.load_l1())
    }
}

/// Degree-of-freedom numbering and sparse pattern for the free nodes.
#[derive(Debug, Clone)]
pub(crate) struct DofSystem {
    pub dofs: Vec<usize>,
    pub dof_of: Vec<usize>,
    /// For each triangle, value slots of the 3×3 element block (`usize::MAX`
    /// where a row or column is fixed).
    pub slots: Vec<[[usize; 3]; 3]>,
    pub pattern: Csr,
}

pub(crate) const NONE: usize = usize::MAX;

impl DofSystem {
    pub fn new(problem: &Problem) -> Self {
        let mesh = &**problem.mesh();
        let mut dof_of = vec![NONE; mesh.n_nodes()];
        let mut dofs = Vec::new();
        for (i, c) in problem.fixed().iter().enumerate() {
            if c.is_none() {
                dof_of[i] = dofs.len();
                dofs.push(i);
            }
        }
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); dofs.len()];
        for tri in mesh.triangles() {
            for &a in tri {
                let da = dof_of[a];
                if da == NONE {
                    continue;
                }
                for &b in tri {
                    let db = dof_of[b];
                    if db != NONE {
                        rows[da].push(db);
                    }
                }
            }
        }
        let pattern = Csr::from_pattern(rows);
        let slots = mesh
            .triangles()
            .iter()
            .map(|tri| {
                let mut s = [[NONE; 3]; 3];
                for a in 0..3 {
                    for b in 0..3 {
                        let (da, db) = (dof_of[tri[a]], dof_of[tri[b]]);
                        if da != NONE && db != NONE {
                            s[a][b] = pattern.slot(da, db).expect("pattern covers element");
                        }
                    }
                }
                s
            })
            .collect();
        Self {
            dofs,
            dof_of,
            slots,
            pattern,
        }
    }

    pub fn n(&self) -> usize {
        self.dofs.len()
    }

    pub fn gather(&self, full: &[f64]) -> Vec<f64> {
        self.dofs.iter().map(|&i| full[i]).collect()
    }

    /// Metric `K + diag(m·d)`: P1 stiffness plus the lumped zero-order mass.
    pub fn metric(&self, problem: &Problem) -> Csr {
        let mesh = &**problem.mesh();
        let mut k = self.pattern.clone();
        let vals = k.values_mut();
        for (t, &area) in mesh.areas().iter().enumerate() {
            let gr = mesh.basis_gradients(t);
            let s = &self.slots[t];
            for a in 0..3 {
                for b in 0..3 {
                    if s[a][b] != NONE {
                        vals[s[a][b]] += area * (gr[a][0] * gr[b][0] + gr[a][1] * gr[b][1]);
                    }
                }
            }
        }
        if let Some(d) = problem.zero_order() {
            let m = mesh.lumped_mass();
            for (di, &node) in self.dofs.iter().enumerate() {
                let slot = k.slot(di, di).expect("diagonal present");
                k.values_mut()[slot] += m[node] * d[node];
            }
        }
        k
    }

    /// Hessian of the regularized energy with respect to the free values.
    pub fn hessian(&self, problem: &Problem, u: &[f64], eps: f64) -> Csr {
        let mesh = &**problem.mesh();
        let y = problem.young();
        let mut h = self.pattern.clone();
        let vals = h.values_mut();
        for (t, &area) in mesh.areas().iter().enumerate() {
            let g = mesh.gradient(t, u);
            let s2 = g[0] * g[0] + g[1] * g[1] + eps * eps;
            let s = s2.sqrt();
            let (a, c) = if s > 0.0 {
                let a = y.phi(s) / s;
                (a, (y.phi_prime(s) - a) / s2)
            } else {
                (0.0, 0.0)
            };
            // element tensor a·I + c·g gᵀ
            let m = [
                [a + c * g[0] * g[0], c * g[0] * g[1]],
                [c * g[0] * g[1], a + c * g[1] * g[1]],
            ];
            let gr = mesh.basis_gradients(t);
            let sl = &self.slots[t];
            for p in 0..3 {
                let mg = [
                    m[0][0] * gr[p][0] + m[0][1] * gr[p][1],
                    m[1][0] * gr[p][0] + m[1][1] * gr[p][1],
                ];
                for q in 0..3 {
                    if sl[p][q] != NONE {
                        vals[sl[p][q]] += area * (mg[0] * gr[q][0] + mg[1] * gr[q][1]);
                    }
                }
            }
        }
        if let Some(d) = problem.zero_order() {
            let m = mesh.lumped_mass();
            for (di, &node) in self.dofs.iter().enumerate() {
                if d[node] != 0.0 {
                    let slot = h.slot(di, di).expect("diagonal present");
                    h.values_mut()[slot] += m[node] * d[node] * y.phi_prime(u[node].abs().max(eps));
                }
            }
        }
        h
    }
}
