//! Analytic reference values for two-sphere squeezing and single-sphere
//! drag.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BrennerParams {
    pub gap: f64,
    pub speed: f64,
    pub viscosity: f64,
    pub tolerance: f64,
    pub max_terms: usize,
}

impl BrennerParams {
    pub fn new(gap: f64) -> Self {
        BrennerParams {
            gap,
            speed: 1.0,
            viscosity: 1.0,
            tolerance: 1e-14,
            max_terms: 1_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BrennerForce {
    /// Magnitude of the force on each sphere.
    pub force: f64,
    pub terms: usize,
    /// False when the term cap was hit before the tolerance.
    pub converged: bool,
}

/// `α` with `cosh α = 1 + δ/2`, without the cancellation of `acosh`.
pub fn bispherical_alpha(delta: f64) -> f64 {
    (delta / 2.0 + (delta + delta * delta / 4.0).sqrt()).ln_1p()
}

// sinh(x) - x, accurate for small x.
fn sinh_minus_x(x: f64) -> f64 {
    if x.abs() < 0.5 {
        let x2 = x * x;
        let mut term = x * x2 / 6.0;
        let mut sum = term;
        let mut k = 3.0;
        while term.abs() > 1e-17 * sum.abs() {
            term *= x2 / ((k + 1.0) * (k + 2.0));
            sum += term;
            k += 2.0;
        }
        sum
    } else {
        x.sinh() - x
    }
}

/// Bracketed factor of the `n`-th term minus one, rewritten so that the
/// subtraction cancels analytically.
fn bracket_minus_one(n: usize, alpha: f64) -> f64 {
    let m = (2 * n + 1) as f64;
    let sh = alpha.sinh();
    let sh2 = (2.0 * alpha).sinh();
    let x = m * alpha;
    if x <= 1.0 {
        let num = 2.0 + 2.0 * (-x).exp() + m * m * sh * sh + m * sh2;
        let den = 2.0 * sinh_minus_x(x) - m * sinh_minus_x(2.0 * alpha);
        num / den
    } else {
        // Scale numerator and denominator by exp(-mα).
        let e = (-x).exp();
        let num = e * (2.0 + 2.0 * e + m * m * sh * sh + m * sh2);
        let den = 1.0 - e * e - m * sh2 * e;
        num / den
    }
}

/// Force on each of two unit spheres approaching each other along their
/// line of centers with speed `speed` each, from the bispherical series.
pub fn brenner_force(p: &BrennerParams) -> Result<BrennerForce> {
    if !(p.gap > 0.0 && p.gap.is_finite()) {
        return Err(Error::InvalidArgument(format!("gap must be positive, got {}", p.gap)));
    }
    if !(p.tolerance > 0.0 && p.tolerance < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must lie in (0, 1), got {}",
            p.tolerance
        )));
    }
    let alpha = bispherical_alpha(p.gap);
    let mut sum = 0.0;
    let mut terms = 0;
    let mut converged = false;
    for n in 1..=p.max_terms {
        let nf = n as f64;
        let t = nf * (nf + 1.0) / ((2.0 * nf - 1.0) * (2.0 * nf + 3.0)) * bracket_minus_one(n, alpha);
        if !t.is_finite() {
            return Err(Error::Numerical(format!("series term {n} is not finite at gap {}", p.gap)));
        }
        debug_assert!(t > 0.0, "series terms are positive");
        sum += t;
        terms = n;
        if t < p.tolerance * sum {
            converged = true;
            break;
        }
    }
    Ok(BrennerForce {
        force: 8.0 * PI * p.viscosity * p.speed * alpha.sinh() * sum,
        terms,
        converged,
    })
}

/// Stokes drag `6π μ |v|` on an isolated unit sphere.
pub fn isolated_drag(viscosity: f64, speed: f64) -> f64 {
    6.0 * PI * viscosity * speed
}
