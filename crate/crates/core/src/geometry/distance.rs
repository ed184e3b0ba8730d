//! Exact Euclidean distance transforms on cell centers.

use rayon::prelude::*;

use super::{DomainMask, GeometryError};

const FAR: f64 = 1e300;

// Lower envelope of parabolas (Felzenszwalb and Huttenlocher) for one line of
// squared distances sampled with spacing `h`.
fn edt_1d(f: &[f64], h: f64, out: &mut [f64], v: &mut Vec<usize>, z: &mut Vec<f64>) {
    let n = f.len();
    v.clear();
    z.clear();
    let pos = |q: usize| q as f64 * h;
    let Some(q0) = f.iter().position(|&x| x < FAR) else {
        out.iter_mut().for_each(|o| *o = FAR);
        return;
    };
    v.push(q0);
    z.push(f64::NEG_INFINITY);
    for q in q0 + 1..n {
        if f[q] >= FAR {
            continue;
        }
        loop {
            let p = *v.last().unwrap();
            let s =
                ((f[q] + pos(q) * pos(q)) - (f[p] + pos(p) * pos(p))) / (2.0 * (pos(q) - pos(p)));
            if s <= *z.last().unwrap() {
                v.pop();
                z.pop();
                if v.is_empty() {
                    v.push(q);
                    z.push(f64::NEG_INFINITY);
                    break;
                }
            } else {
                v.push(q);
                z.push(s);
                break;
            }
        }
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while k + 1 < v.len() && z[k + 1] < pos(q) {
            k += 1;
        }
        let d = pos(q) - pos(v[k]);
        *o = d * d + f[v[k]];
    }
}

/// Squared distance from every cell of an `nx × ny` grid to the nearest
/// feature cell, in physical units.
fn squared_edt(feature: &[bool], nx: usize, ny: usize, hx: f64, hy: f64) -> Vec<f64> {
    let mut cols = vec![0.0; nx * ny];
    // pass 1: along x, rows in parallel
    cols.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
        let f: Vec<f64> = (0..nx)
            .map(|i| if feature[i + nx * j] { 0.0 } else { FAR })
            .collect();
        let (mut v, mut z) = (Vec::new(), Vec::new());
        edt_1d(&f, hx, row, &mut v, &mut z);
    });
    // pass 2: along y, columns in parallel
    let columns: Vec<Vec<f64>> = (0..nx)
        .into_par_iter()
        .map(|i| {
            let f: Vec<f64> = (0..ny).map(|j| cols[i + nx * j]).collect();
            let mut out = vec![0.0; ny];
            let (mut v, mut z) = (Vec::new(), Vec::new());
            edt_1d(&f, hy, &mut out, &mut v, &mut z);
            out
        })
        .collect();
    let mut d = vec![0.0; nx * ny];
    for (i, col) in columns.iter().enumerate() {
        for (j, &val) in col.iter().enumerate() {
            d[i + nx * j] = val;
        }
    }
    d
}

/// Complement of `mask` on the grid extended by a one-cell frame; the frame
/// always belongs to the complement.
fn extended_complement(mask: &DomainMask) -> Vec<bool> {
    let g = mask.grid();
    let (ex, ey) = (g.nx + 2, g.ny + 2);
    let mut c = vec![true; ex * ey];
    for j in 0..g.ny {
        for i in 0..g.nx {
            c[(i + 1) + ex * (j + 1)] = !mask.get(i, j);
        }
    }
    c
}

/// Distance from each cell center of the grid to the nearest cell center of
/// the complement of `mask` (frame included), indexed like the mask.
pub fn complement_distance_field(mask: &DomainMask) -> Vec<f64> {
    let g = mask.grid();
    let (ex, ey) = (g.nx + 2, g.ny + 2);
    let d2 = squared_edt(&extended_complement(mask), ex, ey, g.hx(), g.hy());
    let mut out = vec![0.0; g.cells()];
    for j in 0..g.ny {
        for i in 0..g.nx {
            out[i + g.nx * j] = d2[(i + 1) + ex * (j + 1)].sqrt();
        }
    }
    out
}

/// Hausdorff distance between the complements of two masks, each complement
/// taken inside the design box together with a one-cell exterior frame.
pub fn hausdorff_complement_distance(a: &DomainMask, b: &DomainMask) -> Result<f64, GeometryError> {
    a.grid().check_same(b.grid())?;
    let g = a.grid();
    let (ex, ey) = (g.nx + 2, g.ny + 2);
    let ca = extended_complement(a);
    let cb = extended_complement(b);
    let directed = |from: &[bool], to: &[bool]| -> f64 {
        let d2 = squared_edt(to, ex, ey, g.hx(), g.hy());
        from.iter()
            .zip(&d2)
            .filter(|(f, _)| **f)
            .fold(0.0f64, |m, (_, d)| m.max(*d))
            .sqrt()
    };
    Ok(directed(&ca, &cb).max(directed(&cb, &ca)))
}

/// Radius of the largest disk inside the domain, estimated as the largest
/// center-to-complement distance minus half a cell.
pub fn inradius(mask: &DomainMask) -> f64 {
    let d = complement_distance_field(mask);
    let half = 0.5 * mask.grid().hx().min(mask.grid().hy());
    let m = d.iter().fold(0.0f64, |m, v| m.max(*v));
    if m == 0.0 {
        0.0
    } else {
        (m - half).max(0.0)
    }
}

/// Cells whose distance to the complement is at least `r`.
pub fn erode(mask: &DomainMask, r: f64) -> DomainMask {
    let d = complement_distance_field(mask);
    let cells = d.iter().map(|&v| v >= r).collect();
    DomainMask::new(*mask.grid(), cells).expect("same grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Grid, Shape};

    fn brute_directed(a: &[bool], b: &[bool], ex: usize, h: f64) -> f64 {
        let mut best = 0.0f64;
        for (p, _) in a.iter().enumerate().filter(|(_, v)| **v) {
            let (pi, pj) = ((p % ex) as f64, (p / ex) as f64);
            let mut near = f64::INFINITY;
            for (q, _) in b.iter().enumerate().filter(|(_, v)| **v) {
                let (qi, qj) = ((q % ex) as f64, (q / ex) as f64);
                near = near.min(h * (pi - qi).hypot(pj - qj));
            }
            best = best.max(near);
        }
        best
    }

    #[test]
    fn matches_brute_force() {
        let g = Grid::square(20, [0.0, 0.0, 1.0, 1.0]).unwrap();
        let a = DomainMask::rasterize(&Shape::Full.minus(Shape::disk(0.5, 0.5, 0.1)), g);
        let b = DomainMask::rasterize(&Shape::disk(0.4, 0.6, 0.35), g);
        let (ca, cb) = (extended_complement(&a), extended_complement(&b));
        let want = brute_directed(&ca, &cb, 22, g.hx()).max(brute_directed(&cb, &ca, 22, g.hx()));
        let got = hausdorff_complement_distance(&a, &b).unwrap();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn identical_masks_are_at_distance_zero() {
        let g = Grid::square(16, [0.0, 0.0, 1.0, 1.0]).unwrap();
        let a = DomainMask::rasterize(&Shape::disk(0.5, 0.5, 0.3), g);
        assert_eq!(hausdorff_complement_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn ball_removed_from_box() {
        let g = Grid::square(64, [0.0, 0.0, 1.0, 1.0]).unwrap();
        let full = DomainMask::full(g);
        let holed = DomainMask::rasterize(&Shape::Full.minus(Shape::disk(0.5, 0.5, 0.1)), g);
        let d = hausdorff_complement_distance(&full, &holed).unwrap();
        assert!((d - 0.5).abs() <= g.h() * 2f64.sqrt(), "{d}");
        let smaller = DomainMask::rasterize(&Shape::Full.minus(Shape::disk(0.5, 0.5, 0.05)), g);
        let d = hausdorff_complement_distance(&holed, &smaller).unwrap();
        assert!((d - 0.05).abs() <= g.h() * 2f64.sqrt(), "{d}");
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let a = DomainMask::full(Grid::square(4, [0.0, 0.0, 1.0, 1.0]).unwrap());
        let b = DomainMask::full(Grid::square(5, [0.0, 0.0, 1.0, 1.0]).unwrap());
        assert!(hausdorff_complement_distance(&a, &b).is_err());
    }

    #[test]
    fn inradius_of_disk() {
        let g = Grid::square(128, [-1.0, -1.0, 1.0, 1.0]).unwrap();
        let m = DomainMask::rasterize(&Shape::disk(0.0, 0.0, 0.5), g);
        assert!((inradius(&m) - 0.5).abs() < 2.0 * g.h());
        let core = erode(&m, 0.25);
        assert!(core.is_subset_of(&m).unwrap());
        assert!(!core.is_empty());
    }
}
