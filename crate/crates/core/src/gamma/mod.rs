//! γ-convergence experiments on domain sequences and the variational
//! eigenvalue.

mod config;
mod eigen;
mod hypotheses;

use std::fmt::{self, Write as _};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::capacity::{hypothesis_capacity, CapacityError};
use crate::geometry::{
    generate_sequence, hausdorff_complement_distance, triangulate, DomainMask, DomainSequence,
    DomainSequenceSpec, GeometryError, Grid, Mesh,
};
use crate::orlicz::{luxemburg_norm, sobolev_norm, WeightedSamples};
use crate::solver::{solve, Field, Problem, SolveError, SolveOptions, Source};
use crate::young::{log_grid, morrey_integral, verify_growth, YoungError, YoungFunction};

pub use config::ExperimentConfig;
pub use eigen::{estimate_lambda_variational, EigenOptions, EigenResult};
pub use hypotheses::{
    check_hypotheses, reduction_to_torsion_check, HypothesisVerdict, TheoremApplicable,
    TorsionCheck, Trend,
};

/// Space dimension of every experiment.
pub const DIMENSION: u32 = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GammaError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Young(#[from] YoungError),
    #[error(transparent)]
    Capacity(#[from] CapacityError),
    #[error("solve failed at {}: {source}", k.map_or("the limit domain".to_string(), |k| format!("k = {k}")))]
    Solve {
        /// `None` for the limit domain.
        k: Option<u32>,
        partial: Box<GammaReport>,
        source: SolveError,
    },
    #[error("eigenvalue iteration did not converge (last quotient {last})")]
    EigenNotConverged { last: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("report format: {0}")]
    Format(String),
}

/// One row of a [`GammaReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub k: u32,
    #[serde(rename = "d_Hc")]
    pub d_hc: f64,
    pub cap_diff: f64,
    pub sobolev_dist: f64,
    pub grad_modular_gap: f64,
    pub energy_k: f64,
    pub l2_norm_k: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportHeader {
    pub young: String,
    pub source: String,
    pub kind: String,
    pub nx: usize,
    pub ny: usize,
    pub bbox: [f64; 4],
    pub h: f64,
    pub morrey: String,
    pub p_minus: f64,
    pub p_plus: f64,
    pub limit_sobolev_norm: f64,
    pub limit_l2_norm: f64,
    pub limit_grad_modular: f64,
    pub limit_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GammaReport {
    pub header: ReportHeader,
    pub rows: Vec<ReportRow>,
}

pub const CSV_COLUMNS: &str = "k,d_Hc,cap_diff,sobolev_dist,grad_modular_gap,energy_k,l2_norm_k";

impl GammaReport {
    pub fn to_csv(&self) -> String {
        let h = &self.header;
        let mut out = String::new();
        let b = h.bbox;
        let _ = writeln!(out, "# young: {}", h.young);
        let _ = writeln!(out, "# f: {}", h.source);
        let _ = writeln!(out, "# sequence: {}", h.kind);
        let _ = writeln!(out, "# resolution: {} {}", h.nx, h.ny);
        let _ = writeln!(out, "# box: {:?} {:?} {:?} {:?}", b[0], b[1], b[2], b[3]);
        let _ = writeln!(out, "# h: {:?}", h.h);
        let _ = writeln!(out, "# morrey: {}", h.morrey);
        let _ = writeln!(out, "# p_minus: {:?}", h.p_minus);
        let _ = writeln!(out, "# p_plus: {:?}", h.p_plus);
        let _ = writeln!(out, "# limit_sobolev_norm: {:?}", h.limit_sobolev_norm);
        let _ = writeln!(out, "# limit_l2_norm: {:?}", h.limit_l2_norm);
        let _ = writeln!(out, "# limit_grad_modular: {:?}", h.limit_grad_modular);
        let _ = writeln!(out, "# limit_energy: {:?}", h.limit_energy);
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).expect("in-memory write");
        }
        if self.rows.is_empty() {
            let _ = writeln!(out, "{CSV_COLUMNS}");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory write")).expect("ascii"));
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, GammaError> {
        let bad = |m: String| GammaError::Format(m);
        let real = |k: &str, v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| bad(format!("{k}: {e}")))
        };
        let mut h = ReportHeader::default();
        for line in text.lines().filter(|l| l.starts_with('#')) {
            let (k, v) = line[1..]
                .split_once(':')
                .ok_or_else(|| bad(format!("header line {line:?}")))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "young" => h.young = v.to_string(),
                "f" => h.source = v.to_string(),
                "sequence" => h.kind = v.to_string(),
                "resolution" => {
                    let n: Vec<usize> = v
                        .split_whitespace()
                        .map(str::parse)
                        .collect::<Result<_, _>>()
                        .map_err(|e| bad(format!("resolution: {e}")))?;
                    match n.as_slice() {
                        [nx, ny] => (h.nx, h.ny) = (*nx, *ny),
                        _ => return Err(bad(format!("resolution {v:?}"))),
                    }
                }
                "box" => {
                    let b: Vec<f64> = v
                        .split_whitespace()
                        .map(|x| real("box", x))
                        .collect::<Result<_, _>>()?;
                    h.bbox = b.try_into().map_err(|_| bad(format!("box {v:?}")))?;
                }
                "h" => h.h = real(k, v)?,
                "morrey" => h.morrey = v.to_string(),
                "p_minus" => h.p_minus = real(k, v)?,
                "p_plus" => h.p_plus = real(k, v)?,
                "limit_sobolev_norm" => h.limit_sobolev_norm = real(k, v)?,
                "limit_l2_norm" => h.limit_l2_norm = real(k, v)?,
                "limit_grad_modular" => h.limit_grad_modular = real(k, v)?,
                "limit_energy" => h.limit_energy = real(k, v)?,
                other => return Err(bad(format!("unknown header key {other:?}"))),
            }
        }
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let columns = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
        if columns.iter().collect::<Vec<_>>().join(",") != CSV_COLUMNS {
            return Err(bad(format!("expected columns {CSV_COLUMNS}")));
        }
        let rows = reader
            .deserialize()
            .collect::<Result<Vec<ReportRow>, _>>()
            .map_err(|e| bad(e.to_string()))?;
        Ok(Self { header: h, rows })
    }

    pub fn column(&self, f: impl Fn(&ReportRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }
}

impl fmt::Display for GammaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv())
    }
}

/// Report plus the solutions it was computed from.
#[derive(Debug, Clone)]
pub struct GammaRun {
    pub report: GammaReport,
    /// Solutions on `Ω_k`, in `k` order; `None` where the domain has no free nodes.
    pub members: Vec<Option<Field>>,
    pub limit: Option<Field>,
}

/// Solution of the Dirichlet problem on one mask.
struct Solved {
    field: Option<Field>,
    energy: f64,
}

fn solve_on(
    mask: &DomainMask,
    young: &YoungFunction,
    f: &Source,
    opts: &SolveOptions,
) -> Result<Solved, SolveError> {
    if mask.is_empty() {
        return Ok(Solved {
            field: None,
            energy: 0.0,
        });
    }
    let mesh = Arc::new(triangulate(mask).map_err(|e| SolveError::InvalidInput(e.to_string()))?);
    if mesh.free_count() == 0 {
        return Ok(Solved {
            field: None,
            energy: 0.0,
        });
    }
    let problem = Problem::new(young.clone(), mesh.clone(), f.nodal(&mesh))?;
    let (field, _) = solve(&problem, opts)?;
    let energy = problem.energy(field.values(), 0.0);
    Ok(Solved {
        field: Some(field),
        energy,
    })
}

/// Values on the full lattice of the design box, zero off the mesh.
pub fn extend_by_zero(field: Option<&Field>, grid: &Grid) -> Vec<f64> {
    let mut out = vec![0.0; (grid.nx + 1) * (grid.ny + 1)];
    if let Some(field) = field {
        let mesh = field.mesh();
        for (node, v) in field.values().iter().enumerate() {
            out[mesh.lattice_index(node)] = *v;
        }
    }
    out
}

/// Norms of a field given on the full-box mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldNorms {
    /// `‖u‖_Φ + ‖∇u‖_Φ`.
    pub sobolev: f64,
    /// `∫Φ(|∇u|)`.
    pub grad_modular: f64,
    pub l2: f64,
}

pub fn field_norms(young: &YoungFunction, mesh: &Mesh, u: &[f64]) -> FieldNorms {
    let m = mesh.lumped_mass().to_vec();
    let grads: Vec<f64> = (0..mesh.n_triangles())
        .map(|t| {
            let g = mesh.gradient(t, u);
            g[0].hypot(g[1])
        })
        .collect();
    let vals = WeightedSamples::new(u.to_vec(), m).expect("lumped masses are positive");
    let grad = WeightedSamples::new(grads, mesh.areas().to_vec()).expect("areas are positive");
    let grad_modular = grad
        .values()
        .iter()
        .zip(grad.weights())
        .map(|(g, a)| a * young.big_phi(*g))
        .sum();
    let l2 = vals
        .values()
        .iter()
        .zip(vals.weights())
        .map(|(v, w)| w * v * v)
        .sum::<f64>()
        .sqrt();
    FieldNorms {
        sobolev: sobolev_norm(young, &vals, &grad),
        grad_modular,
        l2,
    }
}

/// Luxemburg norm of a full-box field alone.
pub fn lebesgue_norm(young: &YoungFunction, mesh: &Mesh, u: &[f64]) -> f64 {
    let vals = WeightedSamples::new(u.to_vec(), mesh.lumped_mass().to_vec())
        .expect("lumped masses are positive");
    luxemburg_norm(young, &vals)
}

/// Measured growth indices on a wide logarithmic grid.
pub fn measured_indices(young: &YoungFunction) -> Result<(f64, f64), YoungError> {
    let rep = verify_growth(young, &log_grid(1e-4, 1e4, 401))?;
    Ok((rep.measured_p_minus, rep.measured_p_plus))
}

pub fn run_experiment(
    spec: &DomainSequenceSpec,
    limit: Option<&DomainMask>,
    young: &YoungFunction,
    f: &Source,
    opts: &SolveOptions,
) -> Result<GammaReport, GammaError> {
    run_experiment_detailed(spec, limit, young, f, opts).map(|r| r.report)
}

/// Generates the sequence of `spec` (with `limit` replacing the family's
/// limit when given) and runs [`run_on_sequence`].
pub fn run_experiment_detailed(
    spec: &DomainSequenceSpec,
    limit: Option<&DomainMask>,
    young: &YoungFunction,
    f: &Source,
    opts: &SolveOptions,
) -> Result<GammaRun, GammaError> {
    let mut seq = generate_sequence(spec)?;
    if let Some(l) = limit {
        seq.grid().check_same(l.grid())?;
        seq.limit = l.clone();
    }
    run_on_sequence(&seq, young, f, opts)
}

/// Solves on every member and on the limit, then measures each member
/// against the limit on the full design box.
pub fn run_on_sequence(
    seq: &DomainSequence,
    young: &YoungFunction,
    f: &Source,
    opts: &SolveOptions,
) -> Result<GammaRun, GammaError> {
    opts.validate()
        .map_err(|e| GammaError::InvalidInput(e.to_string()))?;
    let grid = *seq.grid();
    for m in &seq.masks {
        grid.check_same(m.grid())?;
    }
    let (p_minus, p_plus) = measured_indices(young)?;
    let morrey = morrey_integral(young, DIMENSION)?;
    let box_mask = DomainMask::full(grid);
    let box_mesh = triangulate(&box_mask)?;
    let mut header = ReportHeader {
        young: young.describe(),
        source: f.to_string(),
        kind: seq.kind.clone(),
        nx: grid.nx,
        ny: grid.ny,
        bbox: grid.bbox,
        h: grid.h(),
        morrey: morrey.label().to_string(),
        p_minus,
        p_plus,
        ..ReportHeader::default()
    };

    let limit = solve_on(&seq.limit, young, f, opts).map_err(|source| GammaError::Solve {
        k: None,
        partial: Box::new(GammaReport {
            header: header.clone(),
            rows: Vec::new(),
        }),
        source,
    })?;
    let u_lim = extend_by_zero(limit.field.as_ref(), &grid);
    let u_lim_box: Vec<f64> = (0..box_mesh.n_nodes())
        .map(|n| u_lim[box_mesh.lattice_index(n)])
        .collect();
    let lim_norms = field_norms(young, &box_mesh, &u_lim_box);
    header.limit_sobolev_norm = lim_norms.sobolev;
    header.limit_l2_norm = lim_norms.l2;
    header.limit_grad_modular = lim_norms.grad_modular;
    header.limit_energy = limit.energy;

    let outcomes: Vec<Result<(ReportRow, Option<Field>), GammaError>> = seq
        .k_values
        .par_iter()
        .zip(seq.masks.par_iter())
        .map(|(&k, mask)| {
            let solved = solve_on(mask, young, f, opts).map_err(|source| GammaError::Solve {
                k: Some(k),
                partial: Box::default(),
                source,
            })?;
            let d_hc = hausdorff_complement_distance(mask, &seq.limit)?;
            let cap = hypothesis_capacity(mask, &seq.limit, &box_mask, young, opts)?;
            let u_k = extend_by_zero(solved.field.as_ref(), &grid);
            let on_box = |u: &[f64]| -> Vec<f64> {
                (0..box_mesh.n_nodes())
                    .map(|n| u[box_mesh.lattice_index(n)])
                    .collect()
            };
            let u_k_box = on_box(&u_k);
            let diff: Vec<f64> = u_k_box.iter().zip(&u_lim_box).map(|(a, b)| a - b).collect();
            let dn = field_norms(young, &box_mesh, &diff);
            let kn = field_norms(young, &box_mesh, &u_k_box);
            Ok((
                ReportRow {
                    k,
                    d_hc,
                    cap_diff: cap.capacity,
                    sobolev_dist: dn.sobolev,
                    grad_modular_gap: dn.grad_modular,
                    energy_k: solved.energy,
                    l2_norm_k: kn.l2,
                },
                solved.field,
            ))
        })
        .collect();

    let mut rows = Vec::with_capacity(outcomes.len());
    let mut members = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        match outcome {
            Ok((row, field)) => {
                rows.push(row);
                members.push(field);
            }
            Err(GammaError::Solve { k, source, .. }) => {
                return Err(GammaError::Solve {
                    k,
                    partial: Box::new(GammaReport { header, rows }),
                    source,
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(GammaRun {
        report: GammaReport { header, rows },
        members,
        limit: limit.field,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Shape;

    fn sample_report() -> GammaReport {
        GammaReport {
            header: ReportHeader {
                young: "power:3".into(),
                source: "const:1".into(),
                kind: "inscribed_polygon".into(),
                nx: 64,
                ny: 64,
                bbox: [-1.0, -1.0, 1.0, 1.0],
                h: 1.0 / 32.0,
                morrey: "finite".into(),
                p_minus: 2.0,
                p_plus: 2.0000000001,
                limit_sobolev_norm: 0.7,
                limit_l2_norm: 0.3,
                limit_grad_modular: 0.1,
                limit_energy: -0.2,
            },
            rows: vec![
                ReportRow {
                    k: 8,
                    d_hc: 0.07,
                    cap_diff: 0.0,
                    sobolev_dist: 0.1,
                    grad_modular_gap: 1e-3,
                    energy_k: -0.19,
                    l2_norm_k: 0.29,
                },
                ReportRow {
                    k: 16,
                    d_hc: 0.02,
                    cap_diff: 0.0,
                    sobolev_dist: 0.03,
                    grad_modular_gap: 1e-4,
                    energy_k: -0.1999,
                    l2_norm_k: 0.2999,
                },
            ],
        }
    }

    #[test]
    fn csv_round_trip() {
        let r = sample_report();
        assert_eq!(GammaReport::from_csv(&r.to_csv()).unwrap(), r);
        assert!(GammaReport::from_csv("# young: power:2\n").is_err());
        assert!(GammaReport::from_csv(&format!("{CSV_COLUMNS}\n1,2,3\n")).is_err());
    }

    #[test]
    fn constant_sequence_has_zero_gaps() {
        let g = Grid::square(24, [-1.0, -1.0, 1.0, 1.0]).unwrap();
        let disk = DomainMask::rasterize(&Shape::disk(0.0, 0.0, 0.8), g);
        let spec = DomainSequenceSpec {
            kind: "custom_list".into(),
            k_values: vec![1, 2],
            nx: 24,
            ny: 24,
            bbox: Some(g.bbox),
            masks: vec![disk.clone(), disk.clone()],
            limit: Some(disk),
            ..DomainSequenceSpec::default()
        };
        let y = YoungFunction::power(3.0).unwrap();
        let r = run_experiment(
            &spec,
            None,
            &y,
            &Source::Const(1.0),
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(r.rows.len(), 2);
        for row in &r.rows {
            assert_eq!(row.d_hc, 0.0);
            assert_eq!(row.cap_diff, 0.0);
            assert!(row.sobolev_dist <= 1e-8, "{row:?}");
            assert!(row.grad_modular_gap <= 1e-8);
            assert_eq!(row.energy_k, r.header.limit_energy);
        }
        assert_eq!(r.header.morrey, "finite");
    }

    #[test]
    fn empty_limit_gives_zero_limit_norms() {
        let spec = DomainSequenceSpec::new("perforated", vec![2, 3], 24);
        let y = YoungFunction::power(2.0).unwrap();
        let r = run_experiment(
            &spec,
            None,
            &y,
            &Source::Const(1.0),
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(r.header.limit_l2_norm, 0.0);
        for row in &r.rows {
            assert!(row.l2_norm_k > 0.0);
            assert!(row.cap_diff > 0.0);
            // distance to the zero field is the member's own norm
            assert!(row.sobolev_dist > 0.0);
        }
    }
}
