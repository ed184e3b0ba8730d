//! Domain sequences `Ω_k` with their limit `Ω`.
//!
//! Each kind implements [`SequenceFamily`] and is registered by name in a
//! [`SequenceRegistry`]; experiment configs select the kind by that name.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::{parse_shape, DomainMask, GeometryError, Grid, Shape};

/// A parametrized family of domains indexed by `k`.
pub trait SequenceFamily: fmt::Debug + Send + Sync {
    fn kind(&self) -> &str;

    /// Smallest admissible index.
    fn min_k(&self) -> u32 {
        1
    }

    /// Design box used when the spec does not give one.
    fn default_box(&self) -> [f64; 4];

    fn domain(&self, k: u32, grid: Grid) -> Result<DomainMask, GeometryError>;

    fn limit(&self, grid: Grid) -> Result<DomainMask, GeometryError>;
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DomainSequenceSpec {
    pub kind: String,
    pub k_values: Vec<u32>,
    pub nx: usize,
    pub ny: usize,
    pub bbox: Option<[f64; 4]>,
    /// Named geometric parameters; unspecified ones take the family defaults.
    pub params: BTreeMap<String, f64>,
    /// Members and limit of a `custom_list` sequence.
    pub masks: Vec<DomainMask>,
    pub limit: Option<DomainMask>,
}

impl DomainSequenceSpec {
    pub fn new(kind: &str, k_values: Vec<u32>, n: usize) -> Self {
        Self {
            kind: kind.to_string(),
            k_values,
            nx: n,
            ny: n,
            ..Self::default()
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn with_box(mut self, bbox: [f64; 4]) -> Self {
        self.bbox = Some(bbox);
        self
    }

    fn param(&self, name: &str, default: f64) -> f64 {
        self.params.get(name).copied().unwrap_or(default)
    }

    fn check_params(&self, allowed: &[&str]) -> Result<(), GeometryError> {
        match self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(GeometryError::InvalidSequence(format!(
                "{} does not take parameter {k:?} (allowed: {})",
                self.kind,
                allowed.join(", ")
            ))),
            None => Ok(()),
        }
    }
}

fn resolved(size: f64, grid: &Grid) -> Result<(), GeometryError> {
    if size > grid.h() {
        Ok(())
    } else {
        Err(GeometryError::Unresolved {
            size,
            cell: grid.h(),
        })
    }
}

/// Regular `k`-gons inscribed in a fixed disk; increasing along `k | k'`.
#[derive(Debug, Clone)]
pub struct InscribedPolygon {
    pub center: [f64; 2],
    pub radius: f64,
}

impl SequenceFamily for InscribedPolygon {
    fn kind(&self) -> &str {
        "inscribed_polygon"
    }

    fn min_k(&self) -> u32 {
        3
    }

    fn default_box(&self) -> [f64; 4] {
        let [cx, cy] = self.center;
        let r = self.radius;
        [cx - r, cy - r, cx + r, cy + r]
    }

    fn domain(&self, k: u32, grid: Grid) -> Result<DomainMask, GeometryError> {
        let [cx, cy] = self.center;
        let poly = Shape::regular_polygon(k, cx, cy, self.radius)?;
        Ok(DomainMask::rasterize(&poly, grid))
    }

    fn limit(&self, grid: Grid) -> Result<DomainMask, GeometryError> {
        let [cx, cy] = self.center;
        Ok(DomainMask::rasterize(
            &Shape::disk(cx, cy, self.radius),
            grid,
        ))
    }
}

/// Unit square minus the closed balls `B̄_{s·k^(-a)}(i/k, j/k)`, `1 <= i, j <= k-1`.
/// The limit is the empty set.
#[derive(Debug, Clone)]
pub struct Perforated {
    pub radius_scale: f64,
    pub radius_power: f64,
}

impl Perforated {
    pub fn radius(&self, k: u32) -> f64 {
        self.radius_scale * (k as f64).powf(-self.radius_power)
    }

    pub fn shape(&self, k: u32) -> Shape {
        let r = self.radius(k);
        let kf = k as f64;
        let mut holes = Shape::Empty;
        for i in 1..k {
            for j in 1..k {
                holes = holes.union(Shape::disk(i as f64 / kf, j as f64 / kf, r));
            }
        }
        Shape::Full.minus(holes)
    }
}

impl SequenceFamily for Perforated {
    fn kind(&self) -> &str {
        "perforated"
    }

    fn min_k(&self) -> u32 {
        2
    }

    fn default_box(&self) -> [f64; 4] {
        [0.0, 0.0, 1.0, 1.0]
    }

    fn domain(&self, k: u32, grid: Grid) -> Result<DomainMask, GeometryError> {
        resolved(self.radius(k), &grid)?;
        // rasterize hole by hole: the union shape is too deep to test per cell
        let mut mask = DomainMask::full(grid);
        let r = self.radius(k);
        let kf = k as f64;
        let (hx, hy) = (grid.hx(), grid.hy());
        for a in 1..k {
            for b in 1..k {
                let c = [a as f64 / kf, b as f64 / kf];
                let ball = Shape::disk(c[0], c[1], r);
                let lo_i = (((c[0] - r - grid.bbox[0]) / hx).floor() as isize - 1).max(0) as usize;
                let hi_i = ((((c[0] + r - grid.bbox[0]) / hx).ceil() as isize + 1).max(0) as usize)
                    .min(grid.nx);
                let lo_j = (((c[1] - r - grid.bbox[1]) / hy).floor() as isize - 1).max(0) as usize;
                let hi_j = ((((c[1] + r - grid.bbox[1]) / hy).ceil() as isize + 1).max(0) as usize)
                    .min(grid.ny);
                for j in lo_j..hi_j {
                    for i in lo_i..hi_i {
                        if ball.closure_contains(grid.cell_center(i, j)) {
                            mask.set(i, j, false);
                        }
                    }
                }
            }
        }
        Ok(mask)
    }

    fn limit(&self, grid: Grid) -> Result<DomainMask, GeometryError> {
        Ok(DomainMask::empty(grid))
    }
}

/// A disk with an externally tangent ball of radius `1/k` attached.
#[derive(Debug, Clone)]
pub struct VanishingBump {
    pub center: [f64; 2],
    pub radius: f64,
    pub angle: f64,
}

impl VanishingBump {
    pub fn bump(&self, k: u32) -> Shape {
        let rho = 1.0 / k as f64;
        let d = self.radius + rho;
        Shape::disk(
            self.center[0] + d * self.angle.cos(),
            self.center[1] + d * self.angle.sin(),
            rho,
        )
    }
}

impl SequenceFamily for VanishingBump {
    fn kind(&self) -> &str {
        "vanishing_bump"
    }

    fn default_box(&self) -> [f64; 4] {
        [-1.0, -1.0, 1.0, 1.0]
    }

    fn domain(&self, k: u32, grid: Grid) -> Result<DomainMask, GeometryError> {
        resolved(1.0 / k as f64, &grid)?;
        let [cx, cy] = self.center;
        let shape = Shape::disk(cx, cy, self.radius).union(self.bump(k));
        Ok(DomainMask::rasterize(&shape, grid))
    }

    fn limit(&self, grid: Grid) -> Result<DomainMask, GeometryError> {
        let [cx, cy] = self.center;
        Ok(DomainMask::rasterize(
            &Shape::disk(cx, cy, self.radius),
            grid,
        ))
    }
}

/// A disk minus a closed radial slot of width `1/k` running from the center
/// to the boundary; the limit removes the zero-width segment.
#[derive(Debug, Clone)]
pub struct ShrinkingCrack {
    pub center: [f64; 2],
    pub radius: f64,
}

impl ShrinkingCrack {
    fn slot(&self, width: f64) -> Shape {
        let [cx, cy] = self.center;
        let half = 0.5 * width;
        Shape::Rect([cx, cy - half, cx + 2.0 * self.radius, cy + half])
    }
}

impl SequenceFamily for ShrinkingCrack {
    fn kind(&self) -> &str {
        "shrinking_crack"
    }

    fn default_box(&self) -> [f64; 4] {
        let [cx, cy] = self.center;
        let r = self.radius;
        [cx - r, cy - r, cx + r, cy + r]
    }

    fn domain(&self, k: u32, grid: Grid) -> Result<DomainMask, GeometryError> {
        let w = 1.0 / k as f64;
        resolved(w, &grid)?;
        let [cx, cy] = self.center;
        let shape = Shape::disk(cx, cy, self.radius).minus(self.slot(w));
        Ok(DomainMask::rasterize(&shape, grid))
    }

    fn limit(&self, grid: Grid) -> Result<DomainMask, GeometryError> {
        let [cx, cy] = self.center;
        let shape = Shape::disk(cx, cy, self.radius).minus(self.slot(0.0));
        Ok(DomainMask::rasterize(&shape, grid))
    }
}

/// Explicit list of masks, indexed by position (`k = 1, 2, ...`).
#[derive(Debug, Clone)]
pub struct CustomList {
    pub masks: Vec<DomainMask>,
    pub limit: DomainMask,
}

impl SequenceFamily for CustomList {
    fn kind(&self) -> &str {
        "custom_list"
    }

    fn default_box(&self) -> [f64; 4] {
        self.limit.grid().bbox
    }

    fn domain(&self, k: u32, grid: Grid) -> Result<DomainMask, GeometryError> {
        let m = self
            .masks
            .get((k as usize).wrapping_sub(1))
            .ok_or_else(|| {
                GeometryError::InvalidSequence(format!(
                    "custom list has {} masks, no entry {k}",
                    self.masks.len()
                ))
            })?;
        grid.check_same(m.grid())?;
        Ok(m.clone())
    }

    fn limit(&self, grid: Grid) -> Result<DomainMask, GeometryError> {
        grid.check_same(self.limit.grid())?;
        Ok(self.limit.clone())
    }
}

pub type SequenceConstructor = Arc<
    dyn Fn(&DomainSequenceSpec) -> Result<Box<dyn SequenceFamily>, GeometryError> + Send + Sync,
>;

#[derive(Clone, Default)]
pub struct SequenceRegistry {
    kinds: BTreeMap<String, SequenceConstructor>,
}

impl fmt::Debug for SequenceRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SequenceRegistry")
            .field("kinds", &self.names())
            .finish()
    }
}

impl SequenceRegistry {
    pub fn with_builtins() -> Self {
        let mut reg = Self::default();
        reg.register("inscribed_polygon", |s| {
            s.check_params(&["cx", "cy", "radius"])?;
            Ok(Box::new(InscribedPolygon {
                center: [s.param("cx", 0.0), s.param("cy", 0.0)],
                radius: positive("radius", s.param("radius", 1.0))?,
            }))
        });
        reg.register("perforated", |s| {
            s.check_params(&["radius_scale", "radius_power"])?;
            Ok(Box::new(Perforated {
                radius_scale: positive("radius_scale", s.param("radius_scale", 1.0))?,
                radius_power: positive("radius_power", s.param("radius_power", 2.0))?,
            }))
        });
        reg.register("vanishing_bump", |s| {
            s.check_params(&["cx", "cy", "radius", "angle"])?;
            Ok(Box::new(VanishingBump {
                center: [s.param("cx", 0.0), s.param("cy", 0.0)],
                radius: positive("radius", s.param("radius", 0.5))?,
                angle: s.param("angle", FRAC_PI_4),
            }))
        });
        reg.register("shrinking_crack", |s| {
            s.check_params(&["cx", "cy", "radius"])?;
            Ok(Box::new(ShrinkingCrack {
                center: [s.param("cx", 0.0), s.param("cy", 0.0)],
                radius: positive("radius", s.param("radius", 1.0))?,
            }))
        });
        reg.register("custom_list", |s| {
            let limit = s.limit.clone().ok_or_else(|| {
                GeometryError::InvalidSequence("custom_list needs a limit mask".into())
            })?;
            if s.masks.is_empty() {
                return Err(GeometryError::InvalidSequence(
                    "custom_list needs at least one mask".into(),
                ));
            }
            Ok(Box::new(CustomList {
                masks: s.masks.clone(),
                limit,
            }))
        });
        reg
    }

    pub fn register<F>(&mut self, name: &str, ctor: F)
    where
        F: Fn(&DomainSequenceSpec) -> Result<Box<dyn SequenceFamily>, GeometryError>
            + Send
            + Sync
            + 'static,
    {
        self.kinds.insert(name.to_string(), Arc::new(ctor));
    }

    pub fn names(&self) -> Vec<&str> {
        self.kinds.keys().map(String::as_str).collect()
    }

    pub fn family(
        &self,
        spec: &DomainSequenceSpec,
    ) -> Result<Box<dyn SequenceFamily>, GeometryError> {
        let ctor = self
            .kinds
            .get(&spec.kind)
            .ok_or_else(|| GeometryError::UnknownSequence(spec.kind.clone()))?;
        ctor(spec)
    }

    pub fn generate(&self, spec: &DomainSequenceSpec) -> Result<DomainSequence, GeometryError> {
        let family = self.family(spec)?;
        if spec.k_values.is_empty() {
            return Err(GeometryError::InvalidSequence("no k values".into()));
        }
        if spec.k_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(GeometryError::InvalidSequence(format!(
                "k values must be strictly increasing: {:?}",
                spec.k_values
            )));
        }
        if let Some(&k) = spec.k_values.iter().find(|&&k| k < family.min_k()) {
            return Err(GeometryError::InvalidSequence(format!(
                "{} needs k >= {}, got {k}",
                family.kind(),
                family.min_k()
            )));
        }
        let grid = match (&spec.limit, spec.kind.as_str()) {
            (Some(l), "custom_list") => *l.grid(),
            _ => Grid::new(
                spec.nx,
                spec.ny,
                spec.bbox.unwrap_or_else(|| family.default_box()),
            )?,
        };
        let masks = spec
            .k_values
            .iter()
            .map(|&k| family.domain(k, grid))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DomainSequence {
            kind: family.kind().to_string(),
            k_values: spec.k_values.clone(),
            masks,
            limit: family.limit(grid)?,
        })
    }
}

fn positive(name: &str, v: f64) -> Result<f64, GeometryError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(GeometryError::InvalidSequence(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

/// Generated members `Ω_k` (in `k` order) and the limit domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSequence {
    pub kind: String,
    pub k_values: Vec<u32>,
    pub masks: Vec<DomainMask>,
    pub limit: DomainMask,
}

impl DomainSequence {
    pub fn grid(&self) -> &Grid {
        self.limit.grid()
    }
}

/// Generates a sequence with the built-in kinds.
pub fn generate_sequence(spec: &DomainSequenceSpec) -> Result<DomainSequence, GeometryError> {
    SequenceRegistry::with_builtins().generate(spec)
}

/// Writes `<kind>_<k>.mask` for every member and `<kind>_limit.mask`.
pub fn write_sequence(seq: &DomainSequence, dir: &Path) -> Result<Vec<PathBuf>, GeometryError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| GeometryError::Io(format!("{}: {e}", dir.display())))?;
    let mut paths = Vec::new();
    for (k, m) in seq.k_values.iter().zip(&seq.masks) {
        let p = dir.join(format!("{}_{k}.mask", seq.kind));
        m.write(&p)?;
        paths.push(p);
    }
    let p = dir.join(format!("{}_limit.mask", seq.kind));
    seq.limit.write(&p)?;
    paths.push(p);
    Ok(paths)
}

/// Position from which every member contains `compact`, if any.
pub fn containment_index(
    masks: &[DomainMask],
    compact: &DomainMask,
) -> Result<Option<usize>, GeometryError> {
    let mut from = None;
    for (idx, m) in masks.iter().enumerate().rev() {
        if compact.is_subset_of(m)? {
            from = Some(idx);
        } else {
            break;
        }
    }
    Ok(from)
}

/// A single domain on `grid`: a primitive shape (see [`parse_shape`]) or one
/// member of a sequence kind, written `perforated:k`, `bump:k`, `crack:k`.
pub fn parse_domain(spec: &str, grid: Grid) -> Result<DomainMask, GeometryError> {
    let s = spec.trim();
    let (name, body) = s.split_once(':').unwrap_or((s, ""));
    let kind = match name.trim() {
        "perforated" => Some("perforated"),
        "bump" => Some("vanishing_bump"),
        "crack" => Some("shrinking_crack"),
        _ => None,
    };
    match kind {
        Some(kind) => {
            let k: u32 = body
                .trim()
                .parse()
                .map_err(|e| GeometryError::InvalidShape(format!("{spec:?}: bad index: {e}")))?;
            let seq = DomainSequenceSpec::new(kind, vec![k], grid.nx);
            let family = SequenceRegistry::with_builtins().family(&seq)?;
            family.domain(k, grid)
        }
        None => Ok(DomainMask::rasterize(&parse_shape(s)?, grid)),
    }
}
