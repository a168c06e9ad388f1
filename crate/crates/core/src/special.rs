//! Scalar special functions used by the closed-form error rates.
//!
//! The Gaussian tail probability is evaluated through `erfc`. The exponential
//! integral is only needed for negative arguments, where `Ei(-z) = -E1(z)`,
//! so everything here is built on the exponentially scaled `e^z E1(z)`:
//! a power series for `z <= 1` and a continued fraction beyond.

use crate::error::{domain, Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Stopping rule for the series and continued-fraction evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accuracy {
    rel_tol: f64,
    max_terms: usize,
}

impl Accuracy {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol < 1e-6) {
            return Err(domain("rel_tol", rel_tol, "must lie in (0, 1e-6)"));
        }
        if max_terms < 50 {
            return Err(domain("max_terms", max_terms as f64, "must be at least 50"));
        }
        Ok(Self { rel_tol, max_terms })
    }

    /// Tolerance close to double precision, used by the error-rate evaluators
    /// where the result is a small difference of O(1) quantities.
    pub fn precise() -> Self {
        Self {
            rel_tol: 1e-15,
            max_terms: 1000,
        }
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }
}

impl Default for Accuracy {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_terms: 500,
        }
    }
}

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain("x", x, "Q-function needs a finite argument"));
    }
    Ok(q_unchecked(x))
}

#[inline]
pub(crate) fn q_unchecked(x: f64) -> f64 {
    0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Exponential integral `Ei(x)` for `x < 0`.
pub fn exp_integral_ei(x: f64, acc: &Accuracy) -> Result<f64> {
    if x.is_nan() || x >= 0.0 {
        return Err(domain("x", x, "Ei is only implemented for negative arguments"));
    }
    if x == f64::NEG_INFINITY {
        return Ok(-0.0);
    }
    let z = -x;
    Ok(-(-z).exp() * e1_scaled(z, acc)?)
}

/// `e^a · (Ei(-u) - Ei(-v))` for `u, v > 0`, evaluated without forming
/// `e^a` or the individual `Ei` values.
///
/// When the two limits are close the difference is expanded around their
/// midpoint, so no digits are lost to cancellation.
pub fn exp_scaled_ei_diff(a: f64, u: f64, v: f64, acc: &Accuracy) -> Result<f64> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(domain("u", u, "must be positive and finite"));
    }
    if !(v > 0.0 && v.is_finite()) {
        return Err(domain("v", v, "must be positive and finite"));
    }
    if a.is_nan() {
        return Err(domain("a", a, "must not be NaN"));
    }
    if u == v {
        return Ok(0.0);
    }
    if u > v {
        return exp_scaled_ei_diff(a, v, u, acc).map(|d| -d);
    }

    // Ei(-u) - Ei(-v) = -(E1(u) - E1(v)) = -∫_u^v e^{-t}/t dt
    let mid = 0.5 * (u + v);
    let half = 0.5 * (v - u);
    Ok(-centered_e1_integral(a - mid, mid, half, acc)?)
}

/// `e^{s+c} ∫_{c-h}^{c+h} e^{-t}/t dt` for `0 <= h < c`.
///
/// Taking the centre and half-width directly keeps a narrow interval far
/// from the origin resolved to full relative precision.
pub(crate) fn centered_e1_integral(s: f64, c: f64, h: f64, acc: &Accuracy) -> Result<f64> {
    debug_assert!(h >= 0.0 && h < c);
    if h <= 0.5 * c {
        Ok(s.exp() * midpoint_expansion(c, h, acc)?)
    } else {
        let lo = (s + h).exp() * e1_scaled(c - h, acc)?;
        let hi = (s - h).exp() * e1_scaled(c + h, acc)?;
        Ok(lo - hi)
    }
}

/// `e^c ∫_{c-h}^{c+h} e^{-t}/t dt` for `0 < h <= c/2`.
///
/// Term-wise integration of the Taylor series of `e^{-t}/t` about `c`; only
/// even derivatives survive and all of them are positive.
fn midpoint_expansion(c: f64, h: f64, acc: &Accuracy) -> Result<f64> {
    // tail_n = Σ_{i=0}^{n} c^{i-n-1} / i!, so that the n-th derivative at c is
    // (-1)^n e^{-c} n! tail_n.
    let mut tail = 1.0 / c;
    let mut inv_fact = 1.0;
    let mut h_pow = h;
    let mut sum = 2.0 * h * tail;
    for n in 1..acc.max_terms {
        inv_fact /= n as f64;
        tail = (tail + inv_fact) / c;
        h_pow *= h;
        if n % 2 == 1 {
            continue;
        }
        let term = 2.0 * h_pow * tail / (n + 1) as f64;
        sum += term;
        if term <= acc.rel_tol * sum {
            return Ok(sum);
        }
    }
    Err(Error::Convergence {
        what: "exponential-integral midpoint expansion",
        detail: format!("c = {c}, h = {h} after {} terms", acc.max_terms),
    })
}

/// `e^z · E1(z)` for `z > 0`.
pub(crate) fn e1_scaled(z: f64, acc: &Accuracy) -> Result<f64> {
    debug_assert!(z > 0.0);
    if z <= 1.0 {
        // E1(z) = -γ - ln z - Σ_{k≥1} (-z)^k / (k·k!)
        let mut power = 1.0;
        let mut sum = 0.0;
        for k in 1..=acc.max_terms {
            let kf = k as f64;
            power *= -z / kf;
            let term = power / kf;
            sum += term;
            if term.abs() <= acc.rel_tol * sum.abs() {
                return Ok(z.exp() * (-EULER_GAMMA - z.ln() - sum));
            }
        }
        return Err(Error::Convergence {
            what: "E1 power series",
            detail: format!("z = {z} after {} terms", acc.max_terms),
        });
    }

    // Modified Lentz evaluation of
    // e^z E1(z) = 1/(z+1 - 1²/(z+3 - 2²/(z+5 - ...)))
    const TINY: f64 = 1e-300;
    let mut b = z + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=acc.max_terms {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() <= acc.rel_tol {
            return Ok(h);
        }
    }
    Err(Error::Convergence {
        what: "E1 continued fraction",
        detail: format!("z = {z} after {} terms", acc.max_terms),
    })
}
