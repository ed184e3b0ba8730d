//! Planar open sets described by primitives and set operations.

use std::f64::consts::PI;

use super::GeometryError;

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Empty,
    /// The whole plane; intersected with the design box by rasterization.
    Full,
    /// Open axis-aligned rectangle `(x0, y0, x1, y1)`.
    Rect([f64; 4]),
    /// Open disk.
    Disk {
        center: [f64; 2],
        radius: f64,
    },
    /// Open convex polygon, vertices counter-clockwise.
    Polygon(Vec<[f64; 2]>),
    Union(Box<Shape>, Box<Shape>),
    Intersection(Box<Shape>, Box<Shape>),
    /// `A ∖ B̄`: the first set minus the closure of the second, which is open.
    Difference(Box<Shape>, Box<Shape>),
}

impl Shape {
    pub fn disk(cx: f64, cy: f64, radius: f64) -> Self {
        Shape::Disk {
            center: [cx, cy],
            radius,
        }
    }

    /// Regular `k`-gon inscribed in the circle of radius `r` about `(cx, cy)`,
    /// with a vertex at angle 0.
    pub fn regular_polygon(k: u32, cx: f64, cy: f64, r: f64) -> Result<Self, GeometryError> {
        if k < 3 {
            return Err(GeometryError::InvalidShape(format!(
                "a polygon needs at least 3 vertices, got {k}"
            )));
        }
        let verts = (0..k)
            .map(|j| {
                let a = 2.0 * PI * j as f64 / k as f64;
                [cx + r * a.cos(), cy + r * a.sin()]
            })
            .collect();
        Ok(Shape::Polygon(verts))
    }

    pub fn union(self, other: Shape) -> Self {
        Shape::Union(Box::new(self), Box::new(other))
    }

    pub fn intersect(self, other: Shape) -> Self {
        Shape::Intersection(Box::new(self), Box::new(other))
    }

    pub fn minus(self, other: Shape) -> Self {
        Shape::Difference(Box::new(self), Box::new(other))
    }

    /// Membership in the open set.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.test(p, false)
    }

    /// Membership in the closure.
    pub fn closure_contains(&self, p: [f64; 2]) -> bool {
        self.test(p, true)
    }

    fn test(&self, p: [f64; 2], closed: bool) -> bool {
        let lt = |a: f64, b: f64| if closed { a <= b } else { a < b };
        match self {
            Shape::Empty => false,
            Shape::Full => true,
            Shape::Rect([x0, y0, x1, y1]) => {
                lt(*x0, p[0]) && lt(p[0], *x1) && lt(*y0, p[1]) && lt(p[1], *y1)
            }
            Shape::Disk { center, radius } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                lt(dx * dx + dy * dy, radius * radius)
            }
            Shape::Polygon(v) => {
                let n = v.len();
                (0..n).all(|i| {
                    let a = v[i];
                    let b = v[(i + 1) % n];
                    let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
                    lt(0.0, cross)
                })
            }
            Shape::Union(a, b) => a.test(p, closed) || b.test(p, closed),
            Shape::Intersection(a, b) => a.test(p, closed) && b.test(p, closed),
            // closure of A ∖ B̄ is contained in Ā ∖ B; the cell-center test
            // only needs the open set, so the closed variant is an upper bound
            Shape::Difference(a, b) => {
                if closed {
                    a.test(p, true) && !b.test(p, false)
                } else {
                    a.test(p, false) && !b.test(p, true)
                }
            }
        }
    }
}

fn numbers(spec: &str, body: &str) -> Result<Vec<f64>, GeometryError> {
    if body.trim().is_empty() {
        return Ok(Vec::new());
    }
    body.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| GeometryError::InvalidShape(format!("{spec:?}: {e}")))
        })
        .collect()
}

/// Parses primitive shape descriptions:
///
/// * `full`, `square`, `empty`
/// * `disk` (unit disk at the origin), `disk:cx,cy,r`
/// * `rect:x0,y0,x1,y1`
/// * `polygon:k` or `polygon:k,cx,cy,r` (regular, inscribed)
/// * `annulus:rin,rout` (about the origin)
pub fn parse_shape(spec: &str) -> Result<Shape, GeometryError> {
    let s = spec.trim();
    let (name, body) = s.split_once(':').unwrap_or((s, ""));
    let v = numbers(spec, body)?;
    let bad = |why: &str| GeometryError::InvalidShape(format!("{spec:?}: {why}"));
    match (name.trim(), v.len()) {
        ("full" | "square", 0) => Ok(Shape::Full),
        ("empty", 0) => Ok(Shape::Empty),
        ("disk", 0) => Ok(Shape::disk(0.0, 0.0, 1.0)),
        ("disk", 3) if v[2] > 0.0 => Ok(Shape::disk(v[0], v[1], v[2])),
        ("rect", 4) if v[0] < v[2] && v[1] < v[3] => Ok(Shape::Rect([v[0], v[1], v[2], v[3]])),
        ("polygon", 1 | 4) => {
            let k = v[0];
            if k.fract() != 0.0 || k < 3.0 {
                return Err(bad("polygon vertex count must be an integer >= 3"));
            }
            let (cx, cy, r) = if v.len() == 4 {
                (v[1], v[2], v[3])
            } else {
                (0.0, 0.0, 1.0)
            };
            if !(r > 0.0) {
                return Err(bad("radius must be positive"));
            }
            Shape::regular_polygon(k as u32, cx, cy, r)
        }
        ("annulus", 2) if 0.0 < v[0] && v[0] < v[1] => {
            Ok(Shape::disk(0.0, 0.0, v[1]).minus(Shape::disk(0.0, 0.0, v[0])))
        }
        ("full" | "square" | "empty" | "disk" | "rect" | "polygon" | "annulus", _) => {
            Err(bad("wrong number or range of parameters"))
        }
        _ => Err(GeometryError::UnknownShape(name.to_string())),
    }
}
