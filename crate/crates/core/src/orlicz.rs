//! Modulars and Luxemburg norms of sampled functions.

use thiserror::Error;

use crate::young::YoungFunction;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrliczError {
    #[error("values and weights differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("weight {index} is not positive: {value}")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("value {index} is not finite: {value}")]
    NonFinite { index: usize, value: f64 },
}

/// Values of a function (or of a gradient magnitude) at quadrature points,
/// together with the quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSamples {
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedSamples {
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self, OrliczError> {
        if values.len() != weights.len() {
            return Err(OrliczError::LengthMismatch(values.len(), weights.len()));
        }
        if let Some((index, &value)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(**w > 0.0) || !w.is_finite())
        {
            return Err(OrliczError::NonPositiveWeight { index, value });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(OrliczError::NonFinite { index, value });
        }
        Ok(Self { values, weights })
    }

    /// Constant value `c` carried by a single point of weight `total_weight`.
    pub fn constant(c: f64, total_weight: f64) -> Result<Self, OrliczError> {
        Self::new(vec![c], vec![total_weight])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| c * v).collect(),
            weights: self.weights.clone(),
        }
    }
}

/// `Σ wᵢ Φ(|vᵢ|)`.
pub fn modular(y: &YoungFunction, s: &WeightedSamples) -> f64 {
    modular_scaled(y, s, 1.0)
}

/// `Σ wᵢ Φ(|vᵢ| / λ)`.
pub fn modular_scaled(y: &YoungFunction, s: &WeightedSamples, lambda: f64) -> f64 {
    let inv = 1.0 / lambda;
    s.values
        .iter()
        .zip(&s.weights)
        .filter(|(v, _)| **v != 0.0)
        .map(|(v, w)| w * y.big_phi(v.abs() * inv))
        .sum()
}

pub const LUXEMBURG_REL_TOL: f64 = 1e-10;
pub const LUXEMBURG_MAX_ITER: usize = 200;

/// `inf{λ > 0 : Σ wᵢ Φ(|vᵢ|/λ) <= 1}`.
pub fn luxemburg_norm(y: &YoungFunction, s: &WeightedSamples) -> f64 {
    let lambda0 = s.max_abs();
    if lambda0 == 0.0 {
        return 0.0;
    }
    let m = |lambda: f64| modular_scaled(y, s, lambda);
    let (mut lo, mut hi);
    if m(lambda0) > 1.0 {
        lo = lambda0;
        hi = 2.0 * lambda0;
        while m(hi) > 1.0 {
            lo = hi;
            hi *= 2.0;
        }
    } else {
        hi = lambda0;
        lo = 0.5 * lambda0;
        while m(lo) <= 1.0 {
            hi = lo;
            lo *= 0.5;
        }
    }
    for _ in 0..LUXEMBURG_MAX_ITER {
        if hi - lo <= LUXEMBURG_REL_TOL * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if m(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// `‖u‖_Φ + ‖∇u‖_Φ`.
pub fn sobolev_norm(y: &YoungFunction, u: &WeightedSamples, grad: &WeightedSamples) -> f64 {
    luxemburg_norm(y, u) + luxemburg_norm(y, grad)
}

/// Recorded Poincaré constants `C_P` with `Σ Φ(|u|) <= C_P Σ Φ(|∇u|)` for
/// discrete fields vanishing on the boundary of the design box.
///
/// For powers the quotient is scale invariant, so `C_P` is the reciprocal of
/// the discrete first eigenvalue `Λ` of the box measured at `h = 1/64`,
/// recorded as `1 / (0.9 Λ)`.
pub const RECORDED_POINCARE: &[(&str, [f64; 4], f64)] = &[
    ("power:2", [-1.0, -1.0, 1.0, 1.0], 0.2252),
    ("power:3", [-1.0, -1.0, 1.0, 1.0], 0.1416),
    ("power:2", [0.0, 0.0, 1.0, 1.0], 0.05630),
    ("power:3", [0.0, 0.0, 1.0, 1.0], 0.01771),
];

pub fn recorded_poincare_constant(young: &str, bbox: [f64; 4]) -> Option<f64> {
    RECORDED_POINCARE
        .iter()
        .find(|(y, b, _)| *y == young && *b == bbox)
        .map(|(_, _, c)| *c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p3() -> YoungFunction {
        YoungFunction::power(3.0).unwrap()
    }

    #[test]
    fn modular_examples() {
        let y = p3();
        let zero = WeightedSamples::new(vec![0.0; 3], vec![1.0; 3]).unwrap();
        assert_eq!(modular(&y, &zero), 0.0);
        assert_eq!(luxemburg_norm(&y, &zero), 0.0);
        let one = WeightedSamples::constant(1.0, 1.0).unwrap();
        assert_relative_eq!(modular(&y, &one), 1.0 / 3.0);
        let two = WeightedSamples::new(vec![2.0, -2.0], vec![0.25, 0.25]).unwrap();
        assert_relative_eq!(modular(&y, &two), 4.0 / 3.0);
    }

    #[test]
    fn luxemburg_of_constant_matches_closed_form() {
        let y = p3();
        let one = WeightedSamples::new(vec![1.0; 4], vec![0.25; 4]).unwrap();
        assert_relative_eq!(
            luxemburg_norm(&y, &one),
            3f64.powf(-1.0 / 3.0),
            max_relative = 1e-9
        );
        let grad = WeightedSamples::new(vec![0.0; 4], vec![0.25; 4]).unwrap();
        assert_relative_eq!(
            sobolev_norm(&y, &one, &grad),
            3f64.powf(-1.0 / 3.0),
            max_relative = 1e-9
        );
    }

    #[test]
    fn rejects_invalid_samples() {
        assert!(WeightedSamples::new(vec![1.0], vec![]).is_err());
        assert!(WeightedSamples::new(vec![1.0], vec![0.0]).is_err());
        assert!(WeightedSamples::new(vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn poincare_lookup() {
        assert!(recorded_poincare_constant("power:3", [-1.0, -1.0, 1.0, 1.0]).is_some());
        assert!(recorded_poincare_constant("power:7", [-1.0, -1.0, 1.0, 1.0]).is_none());
    }
}
