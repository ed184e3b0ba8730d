//! Symmetric sparse matrices on a fixed pattern, incomplete Cholesky and
//! preconditioned conjugate gradients.

/// Compressed sparse row matrix with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl Csr {
    /// Pattern from per-row column lists (duplicates allowed), all values zero.
    pub fn from_pattern(mut rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for r in rows.iter_mut() {
            r.sort_unstable();
            r.dedup();
            debug_assert!(r.iter().all(|&c| c < n));
            col_idx.extend_from_slice(r);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        Self {
            n,
            row_ptr,
            col_idx,
            values: vec![0.0; nnz],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Position of entry `(i, j)` in the value array.
    pub fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[a..b].binary_search(&j).ok().map(|k| a + k)
    }

    pub fn zero(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.slot(i, i).map_or(0.0, |s| self.values[s]))
            .collect()
    }

    /// `self + alpha·other`, both on the same pattern.
    pub fn add_scaled(&mut self, alpha: f64, other: &Csr) {
        debug_assert_eq!(self.col_idx, other.col_idx);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi = s;
        }
    }
}

/// Incomplete Cholesky factor `L` on the lower-triangular pattern of `A`.
#[derive(Debug, Clone)]
pub struct Ic0 {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl Ic0 {
    /// Factors `A + shift·diag(A)`; fails on a nonpositive pivot.
    pub fn factor(a: &Csr, shift: f64) -> Option<Self> {
        let n = a.n;
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                let j = a.col_idx[k];
                if j <= i {
                    col_idx.push(j);
                    let mut v = a.values[k];
                    if j == i {
                        v *= 1.0 + shift;
                    }
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        let mut l = Self {
            n,
            row_ptr,
            col_idx,
            values,
        };
        for i in 0..n {
            let (a0, b0) = (l.row_ptr[i], l.row_ptr[i + 1]);
            if b0 == a0 || l.col_idx[b0 - 1] != i {
                return None;
            }
            for p in a0..b0 {
                let k = l.col_idx[p];
                // sparse dot of rows i and k over columns < k; the diagonal
                // is the last stored entry of each row
                let (mut pi, mut pk) = (a0, l.row_ptr[k]);
                let k_diag = l.row_ptr[k + 1] - 1;
                let mut s = 0.0;
                while pi < p && pk < k_diag {
                    let (ci, ck) = (l.col_idx[pi], l.col_idx[pk]);
                    match ci.cmp(&ck) {
                        std::cmp::Ordering::Less => pi += 1,
                        std::cmp::Ordering::Greater => pk += 1,
                        std::cmp::Ordering::Equal => {
                            s += l.values[pi] * l.values[pk];
                            pi += 1;
                            pk += 1;
                        }
                    }
                }
                if k < i {
                    l.values[p] = (l.values[p] - s) / l.values[k_diag];
                } else {
                    let d = l.values[p] - s;
                    if !(d > 0.0) || !d.is_finite() {
                        return None;
                    }
                    l.values[p] = d.sqrt();
                }
            }
        }
        Some(l)
    }

    /// Solves `L Lᵀ z = r`.
    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
        for i in 0..self.n {
            let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut s = z[i];
            for p in a..b - 1 {
                s -= self.values[p] * z[self.col_idx[p]];
            }
            z[i] = s / self.values[b - 1];
        }
        for i in (0..self.n).rev() {
            let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
            z[i] /= self.values[b - 1];
            let zi = z[i];
            for p in a..b - 1 {
                z[self.col_idx[p]] -= self.values[p] * zi;
            }
        }
    }
}

/// Modified incomplete Cholesky `UᵀU ≈ A` on the upper pattern of `A`:
/// fill-in outside the pattern is moved to the diagonal (scaled by `omega`),
/// which preserves row sums of M-matrices.
/// Relaxation of the diagonal compensation; 1 gives full MIC(0).
pub const MIC_OMEGA: f64 = 0.99;

#[derive(Debug, Clone)]
pub struct Mic0 {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    /// Row `i` starts with the diagonal `u_ii`.
    values: Vec<f64>,
}

impl Mic0 {
    pub fn factor(a: &Csr, omega: f64) -> Option<Self> {
        let n = a.n;
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            let start = col_idx.len();
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                let j = a.col_idx[k];
                if j >= i {
                    col_idx.push(j);
                    values.push(a.values[k]);
                }
            }
            if col_idx.len() == start || col_idx[start] != i {
                return None;
            }
            row_ptr.push(col_idx.len());
        }
        let mut u = Self {
            n,
            row_ptr,
            col_idx,
            values,
        };
        let slot = |u: &Self, i: usize, j: usize| -> Option<usize> {
            let (a, b) = (u.row_ptr[i], u.row_ptr[i + 1]);
            u.col_idx[a..b].binary_search(&j).ok().map(|p| a + p)
        };
        for k in 0..n {
            let (a0, b0) = (u.row_ptr[k], u.row_ptr[k + 1]);
            let d = u.values[a0];
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let ukk = d.sqrt();
            u.values[a0] = ukk;
            for p in a0 + 1..b0 {
                u.values[p] /= ukk;
            }
            for p in a0 + 1..b0 {
                let i = u.col_idx[p];
                let uki = u.values[p];
                for q in p..b0 {
                    let j = u.col_idx[q];
                    let prod = uki * u.values[q];
                    match slot(&u, i, j) {
                        Some(s) => u.values[s] -= prod,
                        None => {
                            let di = u.row_ptr[i];
                            let dj = u.row_ptr[j];
                            u.values[di] -= omega * prod;
                            u.values[dj] -= omega * prod;
                        }
                    }
                }
            }
        }
        Some(u)
    }

    /// Solves `UᵀU z = r`.
    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
        // Uᵀ y = r, column by column of Uᵀ (rows of U)
        for k in 0..self.n {
            let (a, b) = (self.row_ptr[k], self.row_ptr[k + 1]);
            let yk = z[k] / self.values[a];
            z[k] = yk;
            for p in a + 1..b {
                z[self.col_idx[p]] -= self.values[p] * yk;
            }
        }
        for i in (0..self.n).rev() {
            let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut s = z[i];
            for p in a + 1..b {
                s -= self.values[p] * z[self.col_idx[p]];
            }
            z[i] = s / self.values[a];
        }
    }
}

#[derive(Debug, Clone)]
pub enum Preconditioner {
    Mic0(Mic0),
    Ic0(Ic0),
    Jacobi(Vec<f64>),
}

impl Preconditioner {
    /// MIC(0), then IC(0) with increasing diagonal shifts, then Jacobi.
    pub fn build(a: &Csr) -> Self {
        if let Some(u) = Mic0::factor(a, MIC_OMEGA) {
            return Preconditioner::Mic0(u);
        }
        for shift in [0.0, 1e-3, 1e-2, 1e-1, 1.0] {
            if let Some(l) = Ic0::factor(a, shift) {
                return Preconditioner::Ic0(l);
            }
        }
        Preconditioner::Jacobi(
            a.diagonal()
                .iter()
                .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
                .collect(),
        )
    }

    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        match self {
            Preconditioner::Mic0(u) => u.apply(r, z),
            Preconditioner::Ic0(l) => l.apply(r, z),
            Preconditioner::Jacobi(inv) => {
                for ((zi, ri), di) in z.iter_mut().zip(r).zip(inv) {
                    *zi = ri * di;
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned conjugate gradients for SPD `a`, starting from `x`.
pub fn pcg(
    a: &Csr,
    b: &[f64],
    x: &mut [f64],
    m: &Preconditioner,
    rel_tol: f64,
    max_iter: usize,
) -> CgReport {
    let n = a.n;
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return CgReport {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let mut r = vec![0.0; n];
    a.matvec(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z = vec![0.0; n];
    m.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut rel = dot(&r, &r).sqrt() / bnorm;
    for it in 0..max_iter {
        if rel <= rel_tol {
            return CgReport {
                iterations: it,
                relative_residual: rel,
                converged: true,
            };
        }
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) || !pap.is_finite() {
            return CgReport {
                iterations: it,
                relative_residual: rel,
                converged: false,
            };
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = dot(&r, &r).sqrt() / bnorm;
        m.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    CgReport {
        iterations: max_iter,
        relative_residual: rel,
        converged: rel <= rel_tol,
    }
}
