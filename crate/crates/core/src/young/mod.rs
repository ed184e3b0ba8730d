//! Young functions `Φ(t) = ∫₀ᵗ φ` and the objects derived from them.
//!
//! Every family implements [`GrowthLaw`]; a [`YoungFunction`] is a cheap,
//! shareable handle around one. Families are looked up by name through the
//! [`registry`], which also parses the textual form used in config files
//! (`"power:3"`, `"product(power:3,power:3)"`, ...).

mod families;
mod growth;
pub mod registry;

use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::numeric::{self, NumericError};

pub use families::{Complementary, Composition, Power, PowerLog, Product, Spliced, Sum};
pub use growth::{
    log_grid, monotonicity_constant, monotonicity_gap, morrey_integral, verify_growth,
    GrowthReport, MorreyVerdict,
};
pub use registry::{parse_young, YoungRegistry};

/// Relative tolerance used for quadrature of `φ` and `φ⁻¹`.
pub const QUADRATURE_TOL: f64 = 1e-12;
/// Relative bracket width for inverse evaluations.
pub const INVERSE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum YoungError {
    #[error("invalid parameters for {family}: {reason}")]
    InvalidParams {
        family: &'static str,
        reason: String,
    },
    #[error("argument {0} is outside the domain t >= 0")]
    Domain(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("cannot parse Young function spec {spec:?}: {reason}")]
    Parse { spec: String, reason: String },
    #[error("unknown Young family {0:?}")]
    UnknownFamily(String),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Family tag of a growth law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Power,
    PowerLog,
    Spliced,
    Sum,
    Product,
    Composition,
    Complementary,
}

/// Declared indices of the growth condition `p⁻ <= tφ′(t)/φ(t) <= p⁺`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthIndices {
    pub p_minus: f64,
    pub p_plus: f64,
}

impl GrowthIndices {
    pub fn new(p_minus: f64, p_plus: f64) -> Self {
        Self { p_minus, p_plus }
    }

    /// Whether the lower index satisfies the strict bound `p⁻ > 1`.
    pub fn satisfies_lower_bound(&self) -> bool {
        self.p_minus > 1.0
    }
}

/// One family of Young functions, described by its density `φ`.
///
/// Families supply `φ` and their declared indices; closed forms for `φ′`, `Φ`
/// and the inverses are optional hooks. [`YoungFunction`] falls back to
/// quadrature, finite differences and bracketed inversion when a hook
/// returns `None`.
pub trait GrowthLaw: fmt::Debug + Send + Sync {
    fn family(&self) -> Family;

    fn phi(&self, t: f64) -> f64;

    fn indices(&self) -> GrowthIndices;

    /// Canonical textual form, parseable by [`parse_young`].
    fn describe(&self) -> String;

    fn phi_prime_exact(&self, _t: f64) -> Option<f64> {
        None
    }

    fn primitive_exact(&self, _t: f64) -> Option<f64> {
        None
    }

    fn phi_inverse_exact(&self, _s: f64) -> Option<f64> {
        None
    }

    fn primitive_inverse_exact(&self, _s: f64) -> Option<f64> {
        None
    }

    /// Closed-form complementary function, when the family has one.
    fn complementary_exact(&self) -> Option<YoungFunction> {
        None
    }
}

/// Which derived quantity [`YoungFunction::evaluate`] should compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalKind {
    Phi,
    PhiPrime,
    BigPhi,
    BigPhiStar,
    BigPhiInverse,
    PhiInverse,
}

#[derive(Clone)]
pub struct YoungFunction {
    law: Arc<dyn GrowthLaw>,
}

impl fmt::Debug for YoungFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "YoungFunction({})", self.law.describe())
    }
}

impl fmt::Display for YoungFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.law.describe())
    }
}

impl YoungFunction {
    pub fn new<L: GrowthLaw + 'static>(law: L) -> Self {
        Self { law: Arc::new(law) }
    }

    pub fn from_arc(law: Arc<dyn GrowthLaw>) -> Self {
        Self { law }
    }

    /// `Φ(t) = t^p / p`.
    pub fn power(p: f64) -> Result<Self, YoungError> {
        Power::new(p).map(Self::new)
    }

    pub fn law(&self) -> &dyn GrowthLaw {
        self.law.as_ref()
    }

    pub fn family(&self) -> Family {
        self.law.family()
    }

    pub fn indices(&self) -> GrowthIndices {
        self.law.indices()
    }

    pub fn describe(&self) -> String {
        self.law.describe()
    }

    #[inline]
    pub fn phi(&self, t: f64) -> f64 {
        self.law.phi(t)
    }

    /// `φ′(t)`, analytic when available, otherwise a central difference with
    /// step `1e-6·max(t, 1)` (clamped so the stencil stays in `t >= 0`).
    pub fn phi_prime(&self, t: f64) -> f64 {
        if let Some(d) = self.law.phi_prime_exact(t) {
            return d;
        }
        let h = (1e-6 * t.max(1.0)).min(0.5 * t);
        if h > 0.0 {
            (self.phi(t + h) - self.phi(t - h)) / (2.0 * h)
        } else {
            let h = 1e-6;
            (self.phi(h) - self.phi(0.0)) / h
        }
    }

    /// `Φ(t)`.
    pub fn big_phi(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if let Some(v) = self.law.primitive_exact(t) {
            return v;
        }
        self.primitive_by_quadrature(t)
            .expect("quadrature of a continuous density converges")
    }

    pub(crate) fn primitive_by_quadrature(&self, t: f64) -> Result<f64, NumericError> {
        let law = &self.law;
        numeric::integrate(|x| law.phi(x), 0.0, t, QUADRATURE_TOL)
    }

    /// `φ⁻¹(s)`.
    pub fn phi_inverse(&self, s: f64) -> Result<f64, YoungError> {
        if s <= 0.0 {
            return Ok(0.0);
        }
        if let Some(v) = self.law.phi_inverse_exact(s) {
            return Ok(v);
        }
        let guess = self.index_guess(s, self.phi(1.0), 0.0);
        let law = &self.law;
        Ok(numeric::invert_increasing(
            |x| law.phi(x),
            s,
            guess,
            INVERSE_TOL,
        )?)
    }

    /// `Φ⁻¹(s)`.
    pub fn big_phi_inverse(&self, s: f64) -> Result<f64, YoungError> {
        if s <= 0.0 {
            return Ok(0.0);
        }
        if let Some(v) = self.law.primitive_inverse_exact(s) {
            return Ok(v);
        }
        let guess = self.index_guess(s, self.big_phi(1.0), 1.0);
        Ok(numeric::invert_increasing(
            |x| self.big_phi(x),
            s,
            guess,
            INVERSE_TOL,
        )?)
    }

    // Starting point for inversion from the power-type bounds `g(a) ≈ a^q g(1)`.
    fn index_guess(&self, s: f64, at_one: f64, shift: f64) -> f64 {
        let idx = self.indices();
        let q = 0.5 * (idx.p_minus + idx.p_plus) + shift;
        if at_one > 0.0 && q > 0.0 {
            let g = (s / at_one).powf(1.0 / q);
            if g.is_finite() && g > 0.0 {
                return g;
            }
        }
        1.0
    }

    /// `Φ*(t) = ∫₀ᵗ φ⁻¹(τ) dτ`, always by quadrature of the inverse density.
    pub fn conjugate(&self, t: f64) -> Result<f64, YoungError> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        let failure = RefCell::new(None);
        let value = numeric::integrate(
            |s| match self.phi_inverse(s) {
                Ok(v) => v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            0.0,
            t,
            QUADRATURE_TOL,
        )?;
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(value),
        }
    }

    /// The complementary Young function `Φ*` as a Young function in its own
    /// right (density `φ⁻¹`). Power families map to the conjugate power.
    pub fn complementary(&self) -> YoungFunction {
        self.law
            .complementary_exact()
            .unwrap_or_else(|| YoungFunction::new(Complementary::new(self.clone())))
    }

    /// Evaluates one derived quantity at `t >= 0`.
    pub fn evaluate(&self, kind: EvalKind, t: f64) -> Result<f64, YoungError> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(YoungError::Domain(t));
        }
        Ok(match kind {
            EvalKind::Phi => self.phi(t),
            EvalKind::PhiPrime => self.phi_prime(t),
            EvalKind::BigPhi => self.big_phi(t),
            EvalKind::BigPhiStar => self.conjugate(t)?,
            EvalKind::BigPhiInverse => self.big_phi_inverse(t)?,
            EvalKind::PhiInverse => self.phi_inverse(t)?,
        })
    }

    /// Flux `φ(|v|) v/|v|`, the zero vector when `v = 0`.
    pub fn flux(&self, v: &[f64]) -> Vec<f64> {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return vec![0.0; v.len()];
        }
        let scale = self.phi(norm) / norm;
        v.iter().map(|x| scale * x).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_three_closed_forms() {
        let y = YoungFunction::power(3.0).unwrap();
        assert_relative_eq!(y.phi(2.0), 4.0);
        assert_relative_eq!(y.evaluate(EvalKind::BigPhi, 2.0).unwrap(), 8.0 / 3.0);
        assert_eq!(y.evaluate(EvalKind::BigPhi, 0.0).unwrap(), 0.0);
        let idx = y.indices();
        assert_eq!((idx.p_minus, idx.p_plus), (2.0, 2.0));
    }

    #[test]
    fn conjugate_of_power_three_by_quadrature() {
        let y = YoungFunction::power(3.0).unwrap();
        // φ⁻¹(s) = √s so Φ*(t) = (2/3) t^{3/2}
        for &t in &[1.0f64, 0.25, 7.0] {
            let expected = 2.0 / 3.0 * t * t.sqrt();
            assert_relative_eq!(y.conjugate(t).unwrap(), expected, max_relative = 1e-11);
        }
    }

    #[test]
    fn negative_arguments_are_domain_errors() {
        let y = YoungFunction::power(3.0).unwrap();
        assert!(matches!(
            y.evaluate(EvalKind::BigPhi, -1.0),
            Err(YoungError::Domain(_))
        ));
        assert!(y.evaluate(EvalKind::Phi, f64::NAN).is_err());
    }

    #[test]
    fn flux_vanishes_at_zero() {
        let y = YoungFunction::power(3.0).unwrap();
        assert_eq!(y.flux(&[0.0, 0.0]), vec![0.0, 0.0]);
        let f = y.flux(&[3.0, 4.0]);
        assert_relative_eq!(f[0], 15.0);
        assert_relative_eq!(f[1], 20.0);
    }
}
