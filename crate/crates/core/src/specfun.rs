//! Special functions used by the model formulas.
//!
//! Everything here is a pure function of its arguments. Beta-type quantities
//! are formed in the log domain so that large first arguments (which occur for
//! large drift values) do not overflow.

use crate::error::{Error, Result};

/// A function value together with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecFunResult {
    pub value: f64,
    pub est_abs_error: f64,
}

impl SpecFunResult {
    fn new(value: f64, est_abs_error: f64) -> Self {
        debug_assert!(est_abs_error.is_finite() && est_abs_error >= 0.0);
        Self {
            value,
            est_abs_error,
        }
    }
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} requires a positive finite argument, got {x}"
        )))
    }
}

/// Natural logarithm of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    check_positive("ln_gamma", x)?;
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x >= 10.0 {
        return stirling(x);
    }
    if x < 0.5 {
        // Γ(x) = Γ(x + 1) / x keeps the Lanczos sum in its accurate range.
        return ln_gamma_unchecked(x + 1.0) - x.ln();
    }
    let z = x - 1.0;
    let mut sum = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + sum.ln()
}

fn stirling(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli-number series B_{2k} / (2k (2k - 1) x^{2k-1}).
    let series = inv
        * (1.0 / 12.0
            + inv2
                * (-1.0 / 360.0
                    + inv2
                        * (1.0 / 1260.0
                            + inv2
                                * (-1.0 / 1680.0
                                    + inv2 * (1.0 / 1188.0 + inv2 * (-691.0 / 360_360.0))))));
    (x - 0.5) * x.ln() - x + LN_SQRT_2PI + series
}

/// Logarithm of the complete beta function.
pub fn ln_beta(x: f64, y: f64) -> Result<f64> {
    check_positive("beta", x)?;
    check_positive("beta", y)?;
    Ok(ln_beta_unchecked(x, y))
}

pub(crate) fn ln_beta_unchecked(x: f64, y: f64) -> f64 {
    // Ordering the arguments makes B(x, y) and B(y, x) bitwise identical.
    let (a, b) = if x <= y { (x, y) } else { (y, x) };
    ln_gamma_unchecked(a) + ln_gamma_unchecked(b) - ln_gamma_unchecked(a + b)
}

/// Complete beta function B(x, y) = Γ(x)Γ(y)/Γ(x+y).
pub fn beta(x: f64, y: f64) -> Result<f64> {
    ln_beta(x, y).map(f64::exp)
}

/// Beta function with an error estimate derived from the magnitude of the
/// log-gamma terms that cancel.
pub fn beta_with_error(x: f64, y: f64) -> Result<SpecFunResult> {
    let value = beta(x, y)?;
    let scale =
        ln_gamma_unchecked(x).abs() + ln_gamma_unchecked(y).abs() + ln_gamma_unchecked(x + y).abs();
    Ok(SpecFunResult::new(
        value,
        value * 4.0 * f64::EPSILON * scale.max(1.0),
    ))
}

/// Continued fraction for the regularized incomplete beta function
/// (modified Lentz). Converges quickly for `x <= p / (p + q)`.
fn beta_cf(x: f64, p: f64, q: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = p + q;
    let qap = p + 1.0;
    let qam = p - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (q - m) * x / ((qam + m2) * (p + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(p + m) * (qab + m) * x / ((p + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

fn check_incomplete_args(x: f64, p: f64, q: f64) -> Result<()> {
    check_positive("incomplete_beta", p)?;
    check_positive("incomplete_beta", q)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!(
            "incomplete_beta requires 0 <= x <= 1, got {x}"
        )));
    }
    Ok(())
}

/// `ln` of the lower tail ∫₀ˣ z^{p-1}(1-z)^{q-1} dz computed directly from the
/// continued fraction (valid for any x in (0,1), accurate for x below the split).
fn ln_lower_tail_cf(x: f64, p: f64, q: f64) -> f64 {
    p * x.ln() + q * (-x).ln_1p() + beta_cf(x, p, q).ln() - p.ln()
}

/// Logarithm of the non-regularized incomplete beta integral
/// ∫₀ˣ z^{p-1}(1-z)^{q-1} dz. Returns `-inf` at `x = 0`.
pub fn ln_incomplete_beta(x: f64, p: f64, q: f64) -> Result<f64> {
    check_incomplete_args(x, p, q)?;
    if x == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let ln_b = ln_beta_unchecked(p, q);
    if x == 1.0 {
        return Ok(ln_b);
    }
    if x <= p / (p + q) {
        Ok(ln_lower_tail_cf(x, p, q))
    } else {
        // Upper tail by symmetry: B_x(p,q) = B(p,q) - B_{1-x}(q,p).
        let ln_upper = ln_lower_tail_cf(1.0 - x, q, p);
        Ok(ln_b + (-(ln_upper - ln_b).exp()).ln_1p())
    }
}

/// Non-regularized incomplete beta integral ∫₀ˣ z^{p-1}(1-z)^{q-1} dz.
pub fn incomplete_beta(x: f64, p: f64, q: f64) -> Result<f64> {
    ln_incomplete_beta(x, p, q).map(f64::exp)
}

/// Regularized incomplete beta I_x(p, q).
pub fn regularized_incomplete_beta(x: f64, p: f64, q: f64) -> Result<f64> {
    let ln_bx = ln_incomplete_beta(x, p, q)?;
    Ok((ln_bx - ln_beta_unchecked(p, q)).exp().min(1.0))
}

/// Digamma function ψ₀(x) for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    check_positive("digamma", x)?;
    Ok(digamma_unchecked(x))
}

pub(crate) fn digamma_unchecked(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2
                                        * (1.0 / 132.0
                                            - inv2 * (691.0 / 32_760.0 - inv2 * (1.0 / 12.0)))))));
    acc + x.ln() - 0.5 * inv - series
}
