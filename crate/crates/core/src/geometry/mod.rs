//! Rasterized domains inside a rectangular design box, their P1
//! triangulations, complementary Hausdorff distances and the domain
//! sequences used by the perturbation experiments.

mod distance;
mod mesh;
pub mod sequence;
mod shape;

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

pub use distance::{complement_distance_field, erode, hausdorff_complement_distance, inradius};
pub use mesh::{triangulate, Mesh};
pub use sequence::{
    containment_index, generate_sequence, parse_domain, write_sequence, DomainSequence,
    DomainSequenceSpec, SequenceFamily, SequenceRegistry,
};
pub use shape::{parse_shape, Shape};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grids differ: {0} vs {1}")]
    GridMismatch(Grid, Grid),
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("unknown shape {0:?}")]
    UnknownShape(String),
    #[error("mask has no true cells")]
    EmptyMask,
    #[error("feature of size {size} is not resolved by cell size {cell}; use a finer grid")]
    Unresolved { size: f64, cell: f64 },
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),
    #[error("unknown sequence kind {0:?}")]
    UnknownSequence(String),
    #[error("mask format: {0}")]
    Format(String),
    #[error("io: {0}")]
    Io(String),
}

/// Rectangular design box `(x0, y0, x1, y1)` split into `nx × ny` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub bbox: [f64; 4],
}

impl std::fmt::Display for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let [x0, y0, x1, y1] = self.bbox;
        write!(f, "{}x{} on [{x0}, {x1}]x[{y0}, {y1}]", self.nx, self.ny)
    }
}

impl Grid {
    pub fn new(nx: usize, ny: usize, bbox: [f64; 4]) -> Result<Self, GeometryError> {
        if nx < 2 || ny < 2 {
            return Err(GeometryError::InvalidGrid(format!(
                "resolution must be at least 2x2, got {nx}x{ny}"
            )));
        }
        let [x0, y0, x1, y1] = bbox;
        if !(x0 < x1 && y0 < y1) || !bbox.iter().all(|v| v.is_finite()) {
            return Err(GeometryError::InvalidGrid(format!(
                "degenerate box {bbox:?}"
            )));
        }
        Ok(Self { nx, ny, bbox })
    }

    /// Square grid with `n` cells per side.
    pub fn square(n: usize, bbox: [f64; 4]) -> Result<Self, GeometryError> {
        Self::new(n, n, bbox)
    }

    pub fn hx(&self) -> f64 {
        (self.bbox[2] - self.bbox[0]) / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        (self.bbox[3] - self.bbox[1]) / self.ny as f64
    }

    /// Largest cell side.
    pub fn h(&self) -> f64 {
        self.hx().max(self.hy())
    }

    pub fn cell_area(&self) -> f64 {
        self.hx() * self.hy()
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn diameter(&self) -> f64 {
        let [x0, y0, x1, y1] = self.bbox;
        (x1 - x0).hypot(y1 - y0)
    }

    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.bbox[0] + (i as f64 + 0.5) * self.hx(),
            self.bbox[1] + (j as f64 + 0.5) * self.hy(),
        ]
    }

    pub fn lattice_point(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.bbox[0] + i as f64 * self.hx(),
            self.bbox[1] + j as f64 * self.hy(),
        ]
    }

    pub fn check_same(&self, other: &Grid) -> Result<(), GeometryError> {
        if self == other {
            Ok(())
        } else {
            Err(GeometryError::GridMismatch(*self, *other))
        }
    }
}

/// Cell mask of an open subset of the design box; cell `(i, j)` is stored
/// at `i + nx·j` with `j` counted upward from `y0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainMask {
    grid: Grid,
    inside: Vec<bool>,
}

impl DomainMask {
    pub fn new(grid: Grid, inside: Vec<bool>) -> Result<Self, GeometryError> {
        if inside.len() != grid.cells() {
            return Err(GeometryError::InvalidGrid(format!(
                "expected {} cells, got {}",
                grid.cells(),
                inside.len()
            )));
        }
        Ok(Self { grid, inside })
    }

    pub fn full(grid: Grid) -> Self {
        Self {
            inside: vec![true; grid.cells()],
            grid,
        }
    }

    pub fn empty(grid: Grid) -> Self {
        Self {
            inside: vec![false; grid.cells()],
            grid,
        }
    }

    /// Cell-center rasterization of an open set.
    pub fn rasterize(shape: &Shape, grid: Grid) -> Self {
        let inside = (0..grid.ny)
            .flat_map(|j| (0..grid.nx).map(move |i| (i, j)))
            .map(|(i, j)| shape.contains(grid.cell_center(i, j)))
            .collect();
        Self { grid, inside }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn cells(&self) -> &[bool] {
        &self.inside
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.inside[i + self.grid.nx * j]
    }

    /// Like [`get`](Self::get) but `false` outside the grid.
    #[inline]
    pub fn get_signed(&self, i: isize, j: isize) -> bool {
        i >= 0
            && j >= 0
            && (i as usize) < self.grid.nx
            && (j as usize) < self.grid.ny
            && self.get(i as usize, j as usize)
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        let nx = self.grid.nx;
        self.inside[i + nx * j] = v;
    }

    pub fn count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.inside.iter().any(|&b| b)
    }

    pub fn area(&self) -> f64 {
        self.count() as f64 * self.grid.cell_area()
    }

    fn zip_with(
        &self,
        other: &DomainMask,
        f: impl Fn(bool, bool) -> bool,
    ) -> Result<DomainMask, GeometryError> {
        self.grid.check_same(&other.grid)?;
        Ok(DomainMask {
            grid: self.grid,
            inside: self
                .inside
                .iter()
                .zip(&other.inside)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn and(&self, other: &DomainMask) -> Result<DomainMask, GeometryError> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn or(&self, other: &DomainMask) -> Result<DomainMask, GeometryError> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn and_not(&self, other: &DomainMask) -> Result<DomainMask, GeometryError> {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn is_subset_of(&self, other: &DomainMask) -> Result<bool, GeometryError> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .inside
            .iter()
            .zip(&other.inside)
            .all(|(&a, &b)| !a || b))
    }

    /// Text form: a header line `nx ny x0 y0 x1 y1`, then `ny` rows of `0`/`1`,
    /// the top row (largest `y`) first.
    pub fn to_text(&self) -> String {
        let g = &self.grid;
        let [x0, y0, x1, y1] = g.bbox;
        let mut out = String::with_capacity((g.nx + 1) * (g.ny + 1) + 64);
        let _ = writeln!(out, "{} {} {x0:?} {y0:?} {x1:?} {y1:?}", g.nx, g.ny);
        for j in (0..g.ny).rev() {
            for i in 0..g.nx {
                out.push(if self.get(i, j) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, GeometryError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| GeometryError::Format("missing header".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(GeometryError::Format(format!(
                "header needs 6 fields, got {:?}",
                header
            )));
        }
        let int = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| GeometryError::Format(format!("bad resolution {s:?}: {e}")))
        };
        let real = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| GeometryError::Format(format!("bad coordinate {s:?}: {e}")))
        };
        let grid = Grid::new(
            int(fields[0])?,
            int(fields[1])?,
            [
                real(fields[2])?,
                real(fields[3])?,
                real(fields[4])?,
                real(fields[5])?,
            ],
        )?;
        let mut mask = DomainMask::empty(grid);
        for r in 0..grid.ny {
            let row = lines
                .next()
                .ok_or_else(|| GeometryError::Format(format!("missing row {r}")))?
                .trim();
            if row.len() != grid.nx {
                return Err(GeometryError::Format(format!(
                    "row {r} has {} characters, expected {}",
                    row.len(),
                    grid.nx
                )));
            }
            let j = grid.ny - 1 - r;
            for (i, c) in row.chars().enumerate() {
                match c {
                    '1' => mask.set(i, j, true),
                    '0' => {}
                    other => {
                        return Err(GeometryError::Format(format!(
                            "unexpected character {other:?} in row {r}"
                        )))
                    }
                }
            }
        }
        if lines.next().is_some() {
            return Err(GeometryError::Format("trailing rows".into()));
        }
        Ok(mask)
    }

    pub fn write(&self, path: &Path) -> Result<(), GeometryError> {
        std::fs::write(path, self.to_text())
            .map_err(|e| GeometryError::Io(format!("{}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> Result<Self, GeometryError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GeometryError::Io(format!("{}: {e}", path.display())))?;
        Self::from_text(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid {
        Grid::square(n, [-1.0, -1.0, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(1, 4, [0.0, 0.0, 1.0, 1.0]).is_err());
        assert!(Grid::new(4, 4, [0.0, 0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn full_box_is_all_true() {
        let m = DomainMask::rasterize(&Shape::Full, grid(7));
        assert_eq!(m.count(), 49);
    }

    #[test]
    fn unit_disk_at_four_cells() {
        // cell centers at ±0.25, ±0.75: only the four corner centers
        // (|x| = 1.06) fall outside the disk
        let m = DomainMask::rasterize(&Shape::disk(0.0, 0.0, 1.0), grid(4));
        assert_eq!(m.count(), 12);
        assert!(!m.get(0, 0) && !m.get(3, 3) && m.get(1, 0) && m.get(1, 1));
    }

    #[test]
    fn annulus_count_between_disks() {
        let g = grid(64);
        let outer = DomainMask::rasterize(&Shape::disk(0.0, 0.0, 0.8), g);
        let inner = DomainMask::rasterize(&Shape::disk(0.0, 0.0, 0.4), g);
        let ring = DomainMask::rasterize(
            &Shape::disk(0.0, 0.0, 0.8).minus(Shape::disk(0.0, 0.0, 0.4)),
            g,
        );
        assert!(inner.count() < ring.count() && ring.count() < outer.count());
    }

    #[test]
    fn text_round_trip() {
        let m = DomainMask::rasterize(
            &Shape::disk(0.3, -0.2, 0.5),
            Grid::new(9, 5, [-1.0, -1.0, 1.0, 0.5]).unwrap(),
        );
        let back = DomainMask::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
        assert!(DomainMask::from_text("2 2 0 0 1 1\n10\n").is_err());
        assert!(DomainMask::from_text("2 2 0 0 1 1\n10\n1x\n").is_err());
    }
}
