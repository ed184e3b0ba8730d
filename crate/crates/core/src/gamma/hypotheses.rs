use std::fmt;

use crate::capacity::hypothesis_capacity;
use crate::geometry::{hausdorff_complement_distance, DomainMask, DomainSequenceSpec};
use crate::solver::{SolveOptions, Source};
use crate::young::{morrey_integral, YoungFunction};

use super::{run_experiment, GammaError, GammaReport};

/// A metric tracked along a sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Trend {
    pub values: Vec<f64>,
    /// `last < first / 4` and `last < 4h`.
    pub converging: bool,
}

impl Trend {
    pub fn new(values: Vec<f64>, h: f64) -> Self {
        let converging = match (values.first(), values.last()) {
            (Some(&first), Some(&last)) => last < first / 4.0 && last < 4.0 * h,
            _ => false,
        };
        Self { values, converging }
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] < w[0])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremApplicable {
    /// H^c convergence plus vanishing capacity of `Ω_k ∖ Ω`.
    Main,
    /// H^c convergence plus a finite Morrey integral.
    Main2,
    None,
}

impl TheoremApplicable {
    pub fn label(&self) -> &'static str {
        match self {
            TheoremApplicable::Main => "main",
            TheoremApplicable::Main2 => "main_2",
            TheoremApplicable::None => "none",
        }
    }
}

impl fmt::Display for TheoremApplicable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisVerdict {
    pub hc: Trend,
    pub cap: Trend,
    pub morrey: String,
    pub morrey_finite: bool,
    pub p_minus_ok: bool,
    pub theorem_applicable: TheoremApplicable,
}

impl HypothesisVerdict {
    pub fn hc_converges(&self) -> bool {
        self.hc.converging
    }

    pub fn cap_vanishes(&self) -> bool {
        self.cap.converging
    }

    /// Combines measured `d_Hc` and capacity columns with the Morrey and
    /// `p⁻ > 1` checks.
    pub fn from_columns(
        d_hc: Vec<f64>,
        cap: Vec<f64>,
        h: f64,
        young: &YoungFunction,
        n: u32,
    ) -> Result<Self, GammaError> {
        let hc = Trend::new(d_hc, h);
        let cap = Trend::new(cap, h);
        let morrey = morrey_integral(young, n)?;
        let p_minus_ok = young.indices().satisfies_lower_bound();
        let theorem_applicable = if hc.converging && cap.converging && p_minus_ok {
            TheoremApplicable::Main
        } else if hc.converging && morrey.is_finite() && p_minus_ok {
            TheoremApplicable::Main2
        } else {
            TheoremApplicable::None
        };
        Ok(Self {
            hc,
            cap,
            morrey: morrey.label().to_string(),
            morrey_finite: morrey.is_finite(),
            p_minus_ok,
            theorem_applicable,
        })
    }

    pub fn from_report(
        report: &GammaReport,
        young: &YoungFunction,
        n: u32,
    ) -> Result<Self, GammaError> {
        Self::from_columns(
            report.column(|r| r.d_hc),
            report.column(|r| r.cap_diff),
            report.header.h,
            young,
            n,
        )
    }
}

impl fmt::Display for HypothesisVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "hc_converges {}", self.hc.converging)?;
        writeln!(f, "cap_vanishes {}", self.cap.converging)?;
        writeln!(f, "morrey {}", self.morrey)?;
        writeln!(f, "p_minus_ok {}", self.p_minus_ok)?;
        writeln!(f, "theorem_applicable {}", self.theorem_applicable)
    }
}

/// Measures `d_Hc(Ω_k, Ω)` and `cap(Ω_k ∖ Ω, D)` along the sequence and
/// evaluates the hypotheses of both convergence theorems.
pub fn check_hypotheses(
    masks: &[DomainMask],
    limit: &DomainMask,
    design_box: &DomainMask,
    young: &YoungFunction,
    n: u32,
    opts: &SolveOptions,
) -> Result<HypothesisVerdict, GammaError> {
    let mut d_hc = Vec::with_capacity(masks.len());
    let mut cap = Vec::with_capacity(masks.len());
    for m in masks {
        d_hc.push(hausdorff_complement_distance(m, limit)?);
        cap.push(hypothesis_capacity(m, limit, design_box, young, opts)?.capacity);
    }
    HypothesisVerdict::from_columns(d_hc, cap, limit.grid().h(), young, n)
}

/// Whether the convergence verdicts for `f` and for `f ≡ 1` agree.
#[derive(Debug, Clone, PartialEq)]
pub struct TorsionCheck {
    pub agree: bool,
    pub given_converges: bool,
    pub torsion_converges: bool,
    /// Largest difference between the two normalized `sobolev_dist` columns.
    pub max_deviation: f64,
}

// `sobolev_dist` relative to the limit solution's norm, or to the first
// member's distance when the limit solution vanishes
fn normalized_distances(r: &GammaReport) -> Vec<f64> {
    let d = r.column(|row| row.sobolev_dist);
    let scale = if r.header.limit_sobolev_norm > 0.0 {
        r.header.limit_sobolev_norm
    } else {
        d.first().copied().unwrap_or(0.0)
    };
    if scale > 0.0 {
        d.iter().map(|v| v / scale).collect()
    } else {
        d
    }
}

// decays by at least a factor 4 over the sequence
fn distances_converge(d: &[f64]) -> bool {
    match (d.first(), d.last()) {
        (Some(&first), Some(&last)) => last < first / 4.0,
        _ => false,
    }
}

/// Runs the experiment with `f` and with the torsion load `f ≡ 1` and
/// compares the verdicts on the Sobolev distance.
pub fn reduction_to_torsion_check(
    spec: &DomainSequenceSpec,
    limit: Option<&DomainMask>,
    young: &YoungFunction,
    f: &Source,
    opts: &SolveOptions,
) -> Result<TorsionCheck, GammaError> {
    let given = run_experiment(spec, limit, young, f, opts)?;
    let torsion = run_experiment(spec, limit, young, &Source::Const(1.0), opts)?;
    let a = normalized_distances(&given);
    let b = normalized_distances(&torsion);
    let max_deviation = a
        .iter()
        .zip(&b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let given_converges = distances_converge(&a);
    let torsion_converges = distances_converge(&b);
    Ok(TorsionCheck {
        agree: given_converges == torsion_converges,
        given_converges,
        torsion_converges,
        max_deviation,
    })
}
