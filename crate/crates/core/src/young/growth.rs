use std::fmt;

use super::{GrowthIndices, YoungError, YoungFunction, QUADRATURE_TOL};
use crate::numeric;

/// Slack below which a measured index still counts as satisfying `p⁻ > 1`.
const LOWER_BOUND_SLACK: f64 = 1e-6;
/// Relative slack for the chord-slope convexity test.
const CONVEXITY_SLACK: f64 = 1e-9;

/// `n` logarithmically spaced points on `[lo, hi]`, endpoints included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo, "log_grid needs 0 < lo <= hi");
    if n <= 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Measured growth behaviour of a Young function on a sample grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub declared: GrowthIndices,
    pub samples: usize,
    /// inf / sup of `tφ′(t)/φ(t)`.
    pub measured_p_minus: f64,
    pub measured_p_plus: f64,
    /// inf / sup of `tφ(t)/Φ(t)`.
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// Convexity of `φ` (condition (C)).
    pub cond_c: bool,
    pub big_phi_convex: bool,
    /// Convexity of `Φ(√t)`.
    pub phi_tilde_convex: bool,
    pub p_minus_violated: bool,
}

impl fmt::Display for GrowthReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "samples {}", self.samples)?;
        writeln!(
            f,
            "declared_p_minus {}\ndeclared_p_plus {}",
            self.declared.p_minus, self.declared.p_plus
        )?;
        writeln!(f, "measured_p_minus {:.9}", self.measured_p_minus)?;
        writeln!(f, "measured_p_plus {:.9}", self.measured_p_plus)?;
        writeln!(f, "ratio_min {:.9}", self.ratio_min)?;
        writeln!(f, "ratio_max {:.9}", self.ratio_max)?;
        writeln!(f, "cond_c {}", self.cond_c)?;
        writeln!(f, "big_phi_convex {}", self.big_phi_convex)?;
        writeln!(f, "phi_tilde_convex {}", self.phi_tilde_convex)?;
        write!(
            f,
            "p_minus_gt_1 {}",
            if self.p_minus_violated {
                "violated"
            } else {
                "ok"
            }
        )
    }
}

fn chord_convex(xs: &[f64], g: impl Fn(f64) -> f64) -> bool {
    let ys: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    let slopes: Vec<f64> = xs
        .windows(2)
        .zip(ys.windows(2))
        .filter(|(x, _)| x[1] > x[0])
        .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
        .collect();
    slopes
        .windows(2)
        .all(|s| s[1] >= s[0] - CONVEXITY_SLACK * s[0].abs().max(s[1].abs()))
}

/// Measures the (L) and (L′) ratios and the convexity flags on `grid`.
///
/// `φ′` is always taken by a central difference with step `1e-6·t`, so
/// the report is independent of any closed form the family provides.
pub fn verify_growth(y: &YoungFunction, grid: &[f64]) -> Result<GrowthReport, YoungError> {
    if grid.is_empty() {
        return Err(YoungError::InvalidParams {
            family: "verify_growth",
            reason: "empty sample grid".into(),
        });
    }
    if let Some(&t) = grid.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
        return Err(YoungError::Domain(t));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();

    let (mut l_min, mut l_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut r_min, mut r_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &t in &sorted {
        let h = 1e-6 * t;
        let d = (y.phi(t + h) - y.phi(t - h)) / (2.0 * h);
        let phi = y.phi(t);
        let l = t * d / phi;
        let r = t * phi / y.big_phi(t);
        l_min = l_min.min(l);
        l_max = l_max.max(l);
        r_min = r_min.min(r);
        r_max = r_max.max(r);
    }
    let squares: Vec<f64> = sorted.iter().map(|t| t * t).collect();
    Ok(GrowthReport {
        declared: y.indices(),
        samples: sorted.len(),
        measured_p_minus: l_min,
        measured_p_plus: l_max,
        ratio_min: r_min,
        ratio_max: r_max,
        cond_c: chord_convex(&sorted, |t| y.phi(t)),
        big_phi_convex: chord_convex(&sorted, |t| y.big_phi(t)),
        phi_tilde_convex: chord_convex(&squares, |s| y.big_phi(s.sqrt())),
        p_minus_violated: l_min <= 1.0 + LOWER_BOUND_SLACK,
    })
}

/// `C(p⁻) = p⁻(p⁻+1) / (9·12^((p⁻+1)/2))`, the constant of the refined
/// monotonicity inequality `gap(a, b) >= C(p⁻)·Φ(|a − b|)`.
pub fn monotonicity_constant(p_minus: f64) -> f64 {
    p_minus * (p_minus + 1.0) / (9.0 * 12f64.powf(0.5 * (p_minus + 1.0)))
}

/// `(φ(|a|)a/|a| − φ(|b|)b/|b|)·(a − b)`.
pub fn monotonicity_gap(y: &YoungFunction, a: &[f64], b: &[f64]) -> Result<f64, YoungError> {
    if a.len() != b.len() {
        return Err(YoungError::DimensionMismatch(a.len(), b.len()));
    }
    let fa = y.flux(a);
    let fb = y.flux(b);
    Ok(fa
        .iter()
        .zip(&fb)
        .zip(a.iter().zip(b))
        .map(|((fa, fb), (a, b))| (fa - fb) * (a - b))
        .sum())
}

/// Outcome of the integrability test `∫₁^∞ Φ⁻¹(t) t^(−1−1/n) dt < ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MorreyVerdict {
    /// Integral value; the remaining tail is below `1e-10` relative.
    Finite { value: f64, upper_limit: f64 },
    /// The lower power bound on `Φ⁻¹` already makes the integrand non-integrable.
    Divergent { exponent: f64 },
    /// Neither power bound decides; `partial` is `∫₁^upper_limit`.
    Inconclusive { partial: f64, upper_limit: f64 },
}

impl MorreyVerdict {
    pub fn is_finite(&self) -> bool {
        matches!(self, MorreyVerdict::Finite { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            MorreyVerdict::Finite { .. } => "finite",
            MorreyVerdict::Divergent { .. } => "divergent",
            MorreyVerdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

impl fmt::Display for MorreyVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MorreyVerdict::Finite { value, .. } => write!(f, "finite {value:.12e}"),
            MorreyVerdict::Divergent { exponent } => write!(f, "divergent exponent {exponent}"),
            MorreyVerdict::Inconclusive { partial, .. } => {
                write!(f, "inconclusive partial {partial:.12e}")
            }
        }
    }
}

const MORREY_TAIL_TOL: f64 = 1e-10;
const MORREY_MAX_LIMIT: f64 = 1e300;
const MORREY_INCONCLUSIVE_LIMIT: f64 = 1e12;

/// Classifies the Morrey-type integral for dimension `n`.
///
/// From the power bounds on `Φ`, `Φ⁻¹(t)` lies between `Φ⁻¹(1)t^(1/(p⁺+1))`
/// and `Φ⁻¹(1)t^(1/(p⁻+1))` for `t >= 1`. The first gives divergence when its
/// exponent reaches `−1`; the second gives an explicit tail bound used as the
/// stopping rule while integrating over doubling intervals.
pub fn morrey_integral(y: &YoungFunction, n: u32) -> Result<MorreyVerdict, YoungError> {
    if n == 0 {
        return Err(YoungError::InvalidParams {
            family: "morrey_integral",
            reason: "dimension must be at least 1".into(),
        });
    }
    let idx = y.indices();
    let inv_n = 1.0 / n as f64;
    let e_lower = 1.0 / (idx.p_plus + 1.0) - 1.0 - inv_n;
    if e_lower >= -1.0 {
        return Ok(MorreyVerdict::Divergent { exponent: e_lower });
    }
    let e_upper = 1.0 / (idx.p_minus + 1.0) - 1.0 - inv_n;
    let at_one = y.big_phi_inverse(1.0)?;

    let segment = |lo: f64, hi: f64| -> Result<f64, YoungError> {
        // substitute t = e^x, which flattens the power-law integrand
        let failure = std::cell::RefCell::new(None);
        let v = numeric::integrate(
            |x| {
                let t = x.exp();
                match y.big_phi_inverse(t) {
                    Ok(w) => w * t.powf(-inv_n),
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        0.0
                    }
                }
            },
            lo.ln(),
            hi.ln(),
            QUADRATURE_TOL,
        )?;
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(v),
        }
    };

    let mut value = 0.0;
    let mut t = 1.0;
    if e_upper < -1.0 {
        while t < MORREY_MAX_LIMIT {
            value += segment(t, 2.0 * t)?;
            t *= 2.0;
            let tail = at_one * t.powf(e_upper + 1.0) / (-e_upper - 1.0);
            if tail < MORREY_TAIL_TOL * value.max(1.0) {
                return Ok(MorreyVerdict::Finite {
                    value,
                    upper_limit: t,
                });
            }
        }
        return Ok(MorreyVerdict::Inconclusive {
            partial: value,
            upper_limit: t,
        });
    }
    while t < MORREY_INCONCLUSIVE_LIMIT {
        value += segment(t, 2.0 * t)?;
        t *= 2.0;
    }
    Ok(MorreyVerdict::Inconclusive {
        partial: value,
        upper_limit: t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::young::{PowerLog, YoungFunction};
    use approx::assert_relative_eq;

    #[test]
    fn power_three_indices_are_exact() {
        let y = YoungFunction::power(3.0).unwrap();
        let r = verify_growth(&y, &log_grid(1e-3, 1e3, 61)).unwrap();
        assert!((r.measured_p_minus - 2.0).abs() < 1e-6);
        assert!((r.measured_p_plus - 2.0).abs() < 1e-6);
        assert!((r.ratio_min - 3.0).abs() < 1e-9);
        assert!(r.cond_c && r.big_phi_convex && r.phi_tilde_convex);
        assert!(!r.p_minus_violated);
    }

    #[test]
    fn power_two_flags_lower_bound() {
        let y = YoungFunction::power(2.0).unwrap();
        let r = verify_growth(&y, &log_grid(1e-3, 1e3, 31)).unwrap();
        assert!((r.measured_p_minus - 1.0).abs() < 1e-6);
        assert!(r.p_minus_violated);
    }

    #[test]
    fn powerlog_indices_inside_declared_range() {
        let y = YoungFunction::new(PowerLog::new(1.0, 1.0, 1.0).unwrap());
        let r = verify_growth(&y, &log_grid(1e-3, 1e3, 61)).unwrap();
        assert!(r.measured_p_minus >= 1.0 - 1e-6);
        assert!(r.measured_p_plus <= 2.0 + 1e-6);
        assert!(r.cond_c);
    }

    #[test]
    fn invalid_grids_are_rejected() {
        let y = YoungFunction::power(3.0).unwrap();
        assert!(verify_growth(&y, &[]).is_err());
        assert!(verify_growth(&y, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn gap_examples() {
        let y = YoungFunction::power(3.0).unwrap();
        assert_eq!(monotonicity_gap(&y, &[1.0, 1.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert_relative_eq!(monotonicity_gap(&y, &[1.0, 0.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert!(monotonicity_gap(&y, &[1.0], &[1.0, 2.0]).is_err());
        assert_relative_eq!(monotonicity_constant(2.0), 6.0 / (9.0 * 12f64.powf(1.5)));
        assert_relative_eq!(monotonicity_constant(2.0), 1.6037e-2, max_relative = 1e-4);
    }

    #[test]
    fn morrey_power_examples() {
        let p3 = YoungFunction::power(3.0).unwrap();
        let v = morrey_integral(&p3, 2).unwrap();
        // Φ⁻¹(t) = (3t)^(1/3): ∫₁^∞ 3^(1/3) t^(-7/6) dt = 6·3^(1/3)
        match v {
            MorreyVerdict::Finite { value, .. } => {
                assert_relative_eq!(value, 6.0 * 3f64.cbrt(), max_relative = 1e-8)
            }
            other => panic!("expected finite, got {other:?}"),
        }
        let p2 = YoungFunction::power(2.0).unwrap();
        assert_eq!(morrey_integral(&p2, 2).unwrap().label(), "divergent");
        let p4 = YoungFunction::power(4.0).unwrap();
        assert!(morrey_integral(&p4, 3).unwrap().is_finite());
    }
}
