use super::{Family, GrowthIndices, GrowthLaw, YoungError, YoungFunction};

fn invalid(family: &'static str, reason: impl Into<String>) -> YoungError {
    YoungError::InvalidParams {
        family,
        reason: reason.into(),
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

/// `φ(t) = t^(p-1)`, `Φ(t) = t^p / p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Power {
    p: f64,
}

impl Power {
    pub fn new(p: f64) -> Result<Self, YoungError> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(invalid(
                "power",
                format!("exponent must satisfy p > 1, got {p}"),
            ));
        }
        Ok(Self { p })
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }
}

impl GrowthLaw for Power {
    fn family(&self) -> Family {
        Family::Power
    }

    #[inline]
    fn phi(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            t.powf(self.p - 1.0)
        }
    }

    fn indices(&self) -> GrowthIndices {
        GrowthIndices::new(self.p - 1.0, self.p - 1.0)
    }

    fn describe(&self) -> String {
        format!("power:{}", fmt_num(self.p))
    }

    fn phi_prime_exact(&self, t: f64) -> Option<f64> {
        if t <= 0.0 {
            return Some(if self.p > 2.0 {
                0.0
            } else if self.p == 2.0 {
                1.0
            } else {
                f64::INFINITY
            });
        }
        Some((self.p - 1.0) * t.powf(self.p - 2.0))
    }

    fn primitive_exact(&self, t: f64) -> Option<f64> {
        Some(if t <= 0.0 {
            0.0
        } else {
            t.powf(self.p) / self.p
        })
    }

    fn phi_inverse_exact(&self, s: f64) -> Option<f64> {
        Some(if s <= 0.0 {
            0.0
        } else {
            s.powf(1.0 / (self.p - 1.0))
        })
    }

    fn primitive_inverse_exact(&self, s: f64) -> Option<f64> {
        Some(if s <= 0.0 {
            0.0
        } else {
            (self.p * s).powf(1.0 / self.p)
        })
    }

    fn complementary_exact(&self) -> Option<YoungFunction> {
        let q = self.p / (self.p - 1.0);
        Power::new(q).ok().map(YoungFunction::new)
    }
}

/// `φ(t) = t^a · ln(b + c t)`; `b >= 1` keeps `φ > 0` on `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLog {
    a: f64,
    b: f64,
    c: f64,
}

impl PowerLog {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self, YoungError> {
        if !(a > 0.0 && c > 0.0) || !(a.is_finite() && c.is_finite()) {
            return Err(invalid("powerlog", "need a > 0 and c > 0"));
        }
        if !(b >= 1.0) || !b.is_finite() {
            return Err(invalid(
                "powerlog",
                format!("need b >= 1 so that ln(b + ct) > 0 for t > 0, got b = {b}"),
            ));
        }
        Ok(Self { a, b, c })
    }
}

impl GrowthLaw for PowerLog {
    fn family(&self) -> Family {
        Family::PowerLog
    }

    fn phi(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        t.powf(self.a) * (self.b + self.c * t).ln()
    }

    fn indices(&self) -> GrowthIndices {
        GrowthIndices::new(self.a, self.a + 1.0)
    }

    fn describe(&self) -> String {
        format!(
            "powerlog:{},{},{}",
            fmt_num(self.a),
            fmt_num(self.b),
            fmt_num(self.c)
        )
    }

    fn phi_prime_exact(&self, t: f64) -> Option<f64> {
        if t <= 0.0 {
            return None;
        }
        let x = self.b + self.c * t;
        Some(self.a * t.powf(self.a - 1.0) * x.ln() + t.powf(self.a) * self.c / x)
    }
}

/// Piecewise power density, `C¹` at the splice point `t0`:
/// `φ(t) = t^a1` for `t <= t0` and `φ(t) = c2 t^a2 + d` beyond.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spliced {
    a1: f64,
    a2: f64,
    t0: f64,
    c2: f64,
    d: f64,
}

impl Spliced {
    pub fn new(a1: f64, a2: f64, t0: f64) -> Result<Self, YoungError> {
        if !(a1 > 1.0 && a2 > 1.0) || !(a1.is_finite() && a2.is_finite()) {
            return Err(invalid("spliced", "exponents must satisfy a1, a2 > 1"));
        }
        if !(t0 > 0.0) || !t0.is_finite() {
            return Err(invalid("spliced", "splice point must satisfy t0 > 0"));
        }
        // φ′ continuity: a1 t0^(a1-1) = c2 a2 t0^(a2-1); φ continuity fixes d.
        let c2 = a1 / a2 * t0.powf(a1 - a2);
        let d = t0.powf(a1) - c2 * t0.powf(a2);
        let law = Self { a1, a2, t0, c2, d };
        if !(c2 > 0.0) || !c2.is_finite() || !d.is_finite() {
            return Err(invalid("spliced", "splice constants are not finite"));
        }
        // the outer branch must stay positive and increasing past t0
        let at_t0 = law.phi(t0);
        if !(at_t0 > 0.0) {
            return Err(invalid(
                "spliced",
                "density is not positive at the splice point",
            ));
        }
        let mut prev = at_t0;
        for i in 1..=64 {
            let t = t0 * (1.0 + i as f64 / 8.0);
            let v = law.phi(t);
            if !(v >= prev) {
                return Err(invalid("spliced", "density is not monotone past t0"));
            }
            prev = v;
        }
        Ok(law)
    }
}

impl GrowthLaw for Spliced {
    fn family(&self) -> Family {
        Family::Spliced
    }

    fn phi(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else if t <= self.t0 {
            t.powf(self.a1)
        } else {
            self.c2 * t.powf(self.a2) + self.d
        }
    }

    fn indices(&self) -> GrowthIndices {
        GrowthIndices::new(self.a1.min(self.a2), self.a1.max(self.a2))
    }

    fn describe(&self) -> String {
        format!(
            "spliced:{},{},{}",
            fmt_num(self.a1),
            fmt_num(self.a2),
            fmt_num(self.t0)
        )
    }

    fn phi_prime_exact(&self, t: f64) -> Option<f64> {
        Some(if t <= 0.0 {
            0.0
        } else if t <= self.t0 {
            self.a1 * t.powf(self.a1 - 1.0)
        } else {
            self.c2 * self.a2 * t.powf(self.a2 - 1.0)
        })
    }

    fn primitive_exact(&self, t: f64) -> Option<f64> {
        if t <= 0.0 {
            return Some(0.0);
        }
        let inner = |s: f64| s.powf(self.a1 + 1.0) / (self.a1 + 1.0);
        if t <= self.t0 {
            return Some(inner(t));
        }
        let outer = self.c2 * (t.powf(self.a2 + 1.0) - self.t0.powf(self.a2 + 1.0))
            / (self.a2 + 1.0)
            + self.d * (t - self.t0);
        Some(inner(self.t0) + outer)
    }

    fn phi_inverse_exact(&self, s: f64) -> Option<f64> {
        if s <= 0.0 {
            return Some(0.0);
        }
        let at_t0 = self.t0.powf(self.a1);
        Some(if s <= at_t0 {
            s.powf(1.0 / self.a1)
        } else {
            ((s - self.d) / self.c2).powf(1.0 / self.a2)
        })
    }
}

/// `φ = w1·φ1 + w2·φ2` with nonnegative weights.
#[derive(Debug, Clone)]
pub struct Sum {
    w1: f64,
    first: YoungFunction,
    w2: f64,
    second: YoungFunction,
}

impl Sum {
    pub fn new(
        w1: f64,
        first: YoungFunction,
        w2: f64,
        second: YoungFunction,
    ) -> Result<Self, YoungError> {
        if !(w1 >= 0.0 && w2 >= 0.0) || !(w1 + w2 > 0.0) || !(w1 + w2).is_finite() {
            return Err(invalid(
                "sum",
                "weights must be nonnegative and not both zero",
            ));
        }
        Ok(Self {
            w1,
            first,
            w2,
            second,
        })
    }
}

impl GrowthLaw for Sum {
    fn family(&self) -> Family {
        Family::Sum
    }

    fn phi(&self, t: f64) -> f64 {
        self.w1 * self.first.phi(t) + self.w2 * self.second.phi(t)
    }

    fn indices(&self) -> GrowthIndices {
        let (a, b) = (self.first.indices(), self.second.indices());
        // a zero weight drops that operand from the combination
        match (self.w1 > 0.0, self.w2 > 0.0) {
            (true, false) => a,
            (false, true) => b,
            _ => GrowthIndices::new(a.p_minus.min(b.p_minus), a.p_plus.max(b.p_plus)),
        }
    }

    fn describe(&self) -> String {
        format!(
            "sum({}*{},{}*{})",
            fmt_num(self.w1),
            self.first.describe(),
            fmt_num(self.w2),
            self.second.describe()
        )
    }

    fn primitive_exact(&self, t: f64) -> Option<f64> {
        Some(self.w1 * self.first.big_phi(t) + self.w2 * self.second.big_phi(t))
    }
}

/// `φ = φ1 · φ2`.
#[derive(Debug, Clone)]
pub struct Product {
    first: YoungFunction,
    second: YoungFunction,
}

impl Product {
    pub fn new(first: YoungFunction, second: YoungFunction) -> Self {
        Self { first, second }
    }
}

impl GrowthLaw for Product {
    fn family(&self) -> Family {
        Family::Product
    }

    fn phi(&self, t: f64) -> f64 {
        self.first.phi(t) * self.second.phi(t)
    }

    fn indices(&self) -> GrowthIndices {
        let (a, b) = (self.first.indices(), self.second.indices());
        GrowthIndices::new(a.p_minus + b.p_minus, a.p_plus + b.p_plus)
    }

    fn describe(&self) -> String {
        format!(
            "product({},{})",
            self.first.describe(),
            self.second.describe()
        )
    }
}

/// `φ = φ1 ∘ φ2`.
#[derive(Debug, Clone)]
pub struct Composition {
    outer: YoungFunction,
    inner: YoungFunction,
}

impl Composition {
    pub fn new(outer: YoungFunction, inner: YoungFunction) -> Self {
        Self { outer, inner }
    }
}

impl GrowthLaw for Composition {
    fn family(&self) -> Family {
        Family::Composition
    }

    fn phi(&self, t: f64) -> f64 {
        self.outer.phi(self.inner.phi(t))
    }

    fn indices(&self) -> GrowthIndices {
        let (a, b) = (self.outer.indices(), self.inner.indices());
        GrowthIndices::new(a.p_minus * b.p_minus, a.p_plus * b.p_plus)
    }

    fn describe(&self) -> String {
        format!(
            "compose({},{})",
            self.outer.describe(),
            self.inner.describe()
        )
    }

    fn phi_inverse_exact(&self, s: f64) -> Option<f64> {
        let mid = self.outer.phi_inverse(s).ok()?;
        self.inner.phi_inverse(mid).ok()
    }
}

/// Complementary function of a Young function, with density `φ⁻¹`.
///
/// `Φ*` is evaluated through the equality case of Young's inequality,
/// `Φ*(φ(w)) = w φ(w) − Φ(w)`.
#[derive(Debug, Clone)]
pub struct Complementary {
    base: YoungFunction,
}

impl Complementary {
    pub fn new(base: YoungFunction) -> Self {
        Self { base }
    }
}

impl GrowthLaw for Complementary {
    fn family(&self) -> Family {
        Family::Complementary
    }

    fn phi(&self, s: f64) -> f64 {
        self.base.phi_inverse(s).unwrap_or(f64::NAN)
    }

    fn indices(&self) -> GrowthIndices {
        let b = self.base.indices();
        GrowthIndices::new(1.0 / b.p_plus, 1.0 / b.p_minus)
    }

    fn describe(&self) -> String {
        format!("conjugate({})", self.base.describe())
    }

    fn phi_prime_exact(&self, s: f64) -> Option<f64> {
        if s <= 0.0 {
            return None;
        }
        let w = self.base.phi_inverse(s).ok()?;
        Some(1.0 / self.base.phi_prime(w))
    }

    fn primitive_exact(&self, s: f64) -> Option<f64> {
        if s <= 0.0 {
            return Some(0.0);
        }
        let w = self.base.phi_inverse(s).ok()?;
        Some((s * w - self.base.big_phi(w)).max(0.0))
    }

    fn phi_inverse_exact(&self, t: f64) -> Option<f64> {
        Some(self.base.phi(t))
    }

    fn complementary_exact(&self) -> Option<YoungFunction> {
        Some(self.base.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_rejects_small_exponents() {
        assert!(Power::new(1.0).is_err());
        assert!(Power::new(0.5).is_err());
        assert!(Power::new(f64::NAN).is_err());
        assert!(Power::new(1.5).is_ok());
    }

    #[test]
    fn powerlog_quadrature_matches_closed_form() {
        // φ(t) = t ln(1 + t):
        // Φ(t) = (t(2 - t) - 2(1 - t²) ln(1 + t)) / 4
        let y = YoungFunction::new(PowerLog::new(1.0, 1.0, 1.0).unwrap());
        for &t in &[0.01f64, 0.5, 1.0, 3.0, 40.0] {
            let closed = (t * (2.0 - t) - 2.0 * (1.0 - t * t) * (1.0 + t).ln()) / 4.0;
            assert_relative_eq!(y.big_phi(t), closed, max_relative = 1e-10);
        }
        let idx = y.indices();
        assert_eq!((idx.p_minus, idx.p_plus), (1.0, 2.0));
    }

    #[test]
    fn powerlog_rejects_nonpositive_density() {
        assert!(PowerLog::new(1.0, 0.5, 1.0).is_err());
        assert!(PowerLog::new(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn spliced_is_c1_at_the_splice_point() {
        for &(a1, a2, t0) in &[(2.0, 3.0, 1.0), (3.0, 1.5, 0.7), (1.2, 2.5, 2.0)] {
            let s = Spliced::new(a1, a2, t0).unwrap();
            let e = 1e-9 * t0;
            assert_relative_eq!(s.phi(t0 - e), s.phi(t0 + e), max_relative = 1e-7);
            let d_left = s.phi_prime_exact(t0 - e).unwrap();
            let d_right = s.phi_prime_exact(t0 + e).unwrap();
            assert_relative_eq!(d_left, d_right, max_relative = 1e-7);
            let y = YoungFunction::new(s);
            let q = y.primitive_by_quadrature(2.5 * t0).unwrap();
            assert_relative_eq!(y.big_phi(2.5 * t0), q, max_relative = 1e-10);
        }
        assert!(Spliced::new(1.0, 2.0, 1.0).is_err());
        assert!(Spliced::new(2.0, 3.0, 0.0).is_err());
    }

    #[test]
    fn composite_index_rules() {
        let p3 = YoungFunction::power(3.0).unwrap();
        let prod = Product::new(p3.clone(), p3.clone());
        assert_eq!(prod.indices(), GrowthIndices::new(4.0, 4.0));
        let comp = Composition::new(p3.clone(), p3.clone());
        assert_eq!(comp.indices(), GrowthIndices::new(4.0, 4.0));
        let p4 = YoungFunction::power(4.0).unwrap();
        let sum = Sum::new(1.0, p3, 2.0, p4).unwrap();
        assert_eq!(sum.indices(), GrowthIndices::new(2.0, 3.0));
    }

    #[test]
    fn complementary_of_power_is_conjugate_power() {
        let y = YoungFunction::power(3.0).unwrap();
        let c = y.complementary();
        assert_eq!(c.describe(), "power:1.5");
        let generic = YoungFunction::new(Complementary::new(y.clone()));
        for &t in &[0.3, 1.0, 4.0] {
            assert_relative_eq!(generic.big_phi(t), c.big_phi(t), max_relative = 1e-12);
            assert_relative_eq!(y.conjugate(t).unwrap(), c.big_phi(t), max_relative = 1e-10);
        }
    }
}
