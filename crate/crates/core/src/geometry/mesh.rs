use super::{DomainMask, GeometryError, Grid};

const NO_NODE: u32 = u32::MAX;

/// P1 triangulation of a cell mask. Every true cell contributes the two
/// triangles `[n00, n10, n11]` and `[n00, n11, n01]`; nodes are the lattice
/// points touching a true cell, numbered row by row from the bottom.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    grid: Grid,
    nodes: Vec<[f64; 2]>,
    lattice: Vec<usize>,
    node_of_lattice: Vec<u32>,
    triangles: Vec<[usize; 3]>,
    areas: Vec<f64>,
    basis_grads: Vec<[[f64; 2]; 3]>,
    dirichlet: Vec<bool>,
    lumped: Vec<f64>,
}

pub fn triangulate(mask: &DomainMask) -> Result<Mesh, GeometryError> {
    if mask.is_empty() {
        return Err(GeometryError::EmptyMask);
    }
    let g = *mask.grid();
    let (nx, ny) = (g.nx, g.ny);
    let lx = nx + 1;
    let mut node_of_lattice = vec![NO_NODE; lx * (ny + 1)];
    let mut nodes = Vec::new();
    let mut lattice = Vec::new();
    let mut dirichlet = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let (ii, jj) = (i as isize, j as isize);
            let incident = [
                mask.get_signed(ii - 1, jj - 1),
                mask.get_signed(ii, jj - 1),
                mask.get_signed(ii - 1, jj),
                mask.get_signed(ii, jj),
            ];
            if incident.iter().any(|&c| c) {
                node_of_lattice[i + lx * j] = nodes.len() as u32;
                nodes.push(g.lattice_point(i, j));
                lattice.push(i + lx * j);
                dirichlet.push(!incident.iter().all(|&c| c));
            }
        }
    }
    let id = |i: usize, j: usize| node_of_lattice[i + lx * j] as usize;
    let mut triangles = Vec::with_capacity(2 * mask.count());
    for j in 0..ny {
        for i in 0..nx {
            if mask.get(i, j) {
                let (n00, n10, n01, n11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
                triangles.push([n00, n10, n11]);
                triangles.push([n00, n11, n01]);
            }
        }
    }
    let mut areas = Vec::with_capacity(triangles.len());
    let mut basis_grads = Vec::with_capacity(triangles.len());
    let mut lumped = vec![0.0; nodes.len()];
    for t in &triangles {
        let p = [nodes[t[0]], nodes[t[1]], nodes[t[2]]];
        let det =
            (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        let area = 0.5 * det;
        debug_assert!(area > 0.0);
        let mut gr = [[0.0; 2]; 3];
        for (a, g) in gr.iter_mut().enumerate() {
            let (b, c) = (p[(a + 1) % 3], p[(a + 2) % 3]);
            *g = [(b[1] - c[1]) / det, (c[0] - b[0]) / det];
        }
        for &n in t {
            lumped[n] += area / 3.0;
        }
        areas.push(area);
        basis_grads.push(gr);
    }
    Ok(Mesh {
        grid: g,
        nodes,
        lattice,
        node_of_lattice,
        triangles,
        areas,
        basis_grads,
        dirichlet,
        lumped,
    })
}

impl Mesh {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    /// Gradients of the three barycentric basis functions on triangle `t`.
    #[inline]
    pub fn basis_gradients(&self, t: usize) -> &[[f64; 2]; 3] {
        &self.basis_grads[t]
    }

    pub fn dirichlet(&self) -> &[bool] {
        &self.dirichlet
    }

    pub fn free_count(&self) -> usize {
        self.dirichlet.iter().filter(|d| !**d).count()
    }

    /// Row-summed (lumped) P1 mass: a third of the area of each incident triangle.
    pub fn lumped_mass(&self) -> &[f64] {
        &self.lumped
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Lattice index `i + (nx+1)·j` of a node.
    pub fn lattice_index(&self, node: usize) -> usize {
        self.lattice[node]
    }

    /// Node sitting at lattice point `(i, j)`, if any.
    pub fn node_at(&self, i: usize, j: usize) -> Option<usize> {
        if i > self.grid.nx || j > self.grid.ny {
            return None;
        }
        match self.node_of_lattice[i + (self.grid.nx + 1) * j] {
            NO_NODE => None,
            n => Some(n as usize),
        }
    }

    pub fn node_at_lattice(&self, lattice: usize) -> Option<usize> {
        match self.node_of_lattice.get(lattice) {
            Some(&n) if n != NO_NODE => Some(n as usize),
            _ => None,
        }
    }

    /// Constant gradient of the P1 interpolant of `u` on triangle `t`.
    #[inline]
    pub fn gradient(&self, t: usize, u: &[f64]) -> [f64; 2] {
        let tri = &self.triangles[t];
        let gr = &self.basis_grads[t];
        let mut g = [0.0; 2];
        for a in 0..3 {
            g[0] += u[tri[a]] * gr[a][0];
            g[1] += u[tri[a]] * gr[a][1];
        }
        g
    }

    /// Node nearest to `p`.
    pub fn nearest_node(&self, p: [f64; 2]) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (n, q) in self.nodes.iter().enumerate() {
            let d = (q[0] - p[0]).hypot(q[1] - p[1]);
            if d < best.0 {
                best = (d, n);
            }
        }
        best.1
    }
}
