//! Scalar numerics shared by the Young-function layer: double-exponential
//! quadrature and bracketed inversion of increasing functions.

use std::f64::consts::FRAC_PI_2;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum NumericError {
    #[error(
        "quadrature on [{a}, {b}] did not converge (estimate {estimate}, last change {change})"
    )]
    QuadratureNotConverged {
        a: f64,
        b: f64,
        estimate: f64,
        change: f64,
    },
    #[error("root bracketing failed for target {target}: bracket [{lo}, {hi}]")]
    Bracket { target: f64, lo: f64, hi: f64 },
    #[error("root search did not converge for target {target}: bracket [{lo}, {hi}]")]
    RootNotConverged { target: f64, lo: f64, hi: f64 },
}

const TANH_SINH_TMAX: f64 = 3.5;
const TANH_SINH_MAX_LEVEL: u32 = 12;

/// Integrates `f` over `[a, b]` with tanh-sinh quadrature, refining the step
/// until two successive levels agree to `rel_tol`.
///
/// Endpoint algebraic singularities in `f` or its derivatives (as in
/// `s -> s^(1/(p-1))`) do not slow convergence; the integrand is never
/// evaluated at `a` or `b`.
pub fn integrate<F>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64, NumericError>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate(f, b, a, rel_tol).map(|v| -v);
    }
    let width = b - a;
    let half = 0.5 * width;

    // Contribution of the node pair at +t and -t (t > 0).
    let pair = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let cu = u.cosh();
        let w = half * FRAC_PI_2 * t.cosh() / (cu * cu);
        if !(w > 0.0) || !w.is_finite() {
            return 0.0;
        }
        let offset = width / (1.0 + (2.0 * u).exp());
        if offset <= 0.0 {
            return 0.0;
        }
        let left = a + offset;
        let right = b - offset;
        w * (f(left) + f(right))
    };

    let mut h = 1.0;
    let mut sum = half * FRAC_PI_2 * f(a + half);
    let mut k = 1;
    while (k as f64) * h <= TANH_SINH_TMAX {
        sum += pair(k as f64 * h);
        k += 1;
    }
    let mut estimate = h * sum;
    let mut change = f64::INFINITY;
    for _level in 1..=TANH_SINH_MAX_LEVEL {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= TANH_SINH_TMAX {
            sum += pair(k as f64 * h);
            k += 2;
        }
        let next = h * sum;
        change = (next - estimate).abs();
        estimate = next;
        if change <= rel_tol * next.abs() || change <= f64::MIN_POSITIVE {
            return Ok(estimate);
        }
    }
    if change <= 1e3 * rel_tol * estimate.abs() {
        // close enough: the last level is accurate well beyond the reported change
        return Ok(estimate);
    }
    Err(NumericError::QuadratureNotConverged {
        a,
        b,
        estimate,
        change,
    })
}

/// Solves `g(x) = target` for `x >= 0` where `g` is continuous, increasing,
/// and `g(0) = 0`. `guess` seeds the bracket search; it is expanded by
/// doubling/halving and then shrunk to relative width `rel_tol`.
///
/// The shrinking step alternates bisection with an Illinois false-position
/// update, so the bracket width at least halves every other iteration.
pub fn invert_increasing<G>(
    g: G,
    target: f64,
    guess: f64,
    rel_tol: f64,
) -> Result<f64, NumericError>
where
    G: Fn(f64) -> f64,
{
    if target <= 0.0 {
        return Ok(0.0);
    }
    let guess = if guess.is_finite() && guess > 0.0 {
        guess
    } else {
        1.0
    };
    let mut lo;
    let mut hi;
    let g0 = g(guess);
    if g0 >= target {
        hi = guess;
        lo = 0.5 * guess;
        let mut steps = 0;
        while g(lo) >= target {
            hi = lo;
            lo *= 0.5;
            steps += 1;
            if lo < f64::MIN_POSITIVE || steps > 2100 {
                return Err(NumericError::Bracket { target, lo, hi });
            }
        }
    } else {
        lo = guess;
        hi = 2.0 * guess;
        let mut steps = 0;
        while g(hi) < target {
            lo = hi;
            hi *= 2.0;
            steps += 1;
            if !hi.is_finite() || steps > 2100 {
                return Err(NumericError::Bracket { target, lo, hi });
            }
        }
    }
    refine_bracket(&g, target, lo, hi, rel_tol)
}

/// Shrinks a bracket `g(lo) < target <= g(hi)` of an increasing `g`.
pub fn refine_bracket<G>(
    g: &G,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
) -> Result<f64, NumericError>
where
    G: Fn(f64) -> f64,
{
    let mut f_lo = g(lo) - target;
    let mut f_hi = g(hi) - target;
    if f_lo > 0.0 || f_hi < 0.0 {
        return Err(NumericError::Bracket { target, lo, hi });
    }
    // Which side was retained on the previous false-position step (Illinois).
    let mut retained = 0i8;
    for iter in 0..400 {
        if hi - lo <= rel_tol * hi.abs() {
            return Ok(0.5 * (lo + hi));
        }
        let x = if iter % 2 == 0 && f_hi > f_lo {
            let x = lo - f_lo * (hi - lo) / (f_hi - f_lo);
            if x > lo && x < hi {
                x
            } else {
                0.5 * (lo + hi)
            }
        } else {
            0.5 * (lo + hi)
        };
        let fx = g(x) - target;
        if fx.abs() <= 4.0 * f64::EPSILON * target.abs() {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
            f_lo = fx;
            if retained == 1 {
                f_hi *= 0.5;
            }
            retained = 1;
        } else {
            hi = x;
            f_hi = fx;
            if retained == -1 {
                f_lo *= 0.5;
            }
            retained = -1;
        }
    }
    Err(NumericError::RootNotConverged { target, lo, hi })
}
