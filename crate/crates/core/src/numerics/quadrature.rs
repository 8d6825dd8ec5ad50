//! Adaptive Gauss–Kronrod quadrature with declared endpoint singularities.
//!
//! An endpoint singularity `(x - a)^e` with `e > -1` is removed by the
//! substitution `x = a + (b - a) s^k`, `k = 1 / (1 + e)`, which turns the
//! integrand into a bounded function of `s`; a fractional `e > 0` uses
//! `k = 3`. The integrand receives the exact distances to both endpoints
//! ([`Abscissa`]) so that it never has to form a small difference by
//! cancellation close to a singular point.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and subdivision budget for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::Config(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::Config(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Config("max_subdivisions must be at least 1".into()));
        }
        Ok(())
    }

    /// Divides both tolerances by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol / factor,
            rel_tol: self.rel_tol / factor,
            max_subdivisions: self.max_subdivisions,
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-6,
            max_subdivisions: 20_000,
        }
    }
}

/// Integral estimate with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub subdivisions: usize,
    pub converged: bool,
}

impl QuadResult {
    fn into_result(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                subdivisions: self.subdivisions,
                value: self.value,
                error: self.abs_error,
            })
        }
    }
}

/// A quadrature node: the point `x` and its exact distances to the ends of
/// the integration interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Abscissa {
    pub x: f64,
    pub to_lo: f64,
    pub to_hi: f64,
}

/// Exponents of integrable power singularities at the interval ends.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EndpointSingularity {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

impl EndpointSingularity {
    pub fn none() -> Self {
        Self::default()
    }
    pub fn lo(e: f64) -> Self {
        Self {
            lo: Some(e),
            hi: None,
        }
    }
    pub fn hi(e: f64) -> Self {
        Self {
            lo: None,
            hi: Some(e),
        }
    }
    pub fn both(lo: f64, hi: f64) -> Self {
        Self {
            lo: Some(lo),
            hi: Some(hi),
        }
    }
}

// 15-point Kronrod nodes (positive half) and weights, with the embedded
// 7-point Gauss weights for every other node.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod panel on `[a, b]`, QUADPACK-style error estimate.
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (result, err)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    piece: usize,
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Maps `s in [0, 1]` onto part of the original interval.
#[derive(Debug, Clone, Copy)]
struct Piece {
    /// true: anchored at the lower end of the original interval.
    from_lo: bool,
    /// Length of this piece.
    len: f64,
    /// Power of the substitution (1 means linear).
    k: f64,
}

/// Jacobian of the substitution at a node, directly and as a logarithm.
/// The logarithm stays accurate where the direct value underflows.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Weight {
    pub(crate) value: f64,
    pub(crate) ln: f64,
}

struct Mapped<'a, F> {
    f: &'a mut F,
    a: f64,
    b: f64,
}

impl<F: FnMut(Abscissa, Weight) -> f64> Mapped<'_, F> {
    fn eval(&mut self, piece: &Piece, s: f64) -> f64 {
        let total = self.b - self.a;
        let t = piece.len * s.powf(piece.k);
        if t == 0.0 {
            // node underflowed onto the endpoint; its weighted contribution is negligible
            return 0.0;
        }
        let weight = Weight {
            value: piece.len * piece.k * s.powf(piece.k - 1.0),
            ln: (piece.len * piece.k).ln() + (piece.k - 1.0) * s.ln(),
        };
        let pt = if piece.from_lo {
            Abscissa {
                x: self.a + t,
                to_lo: t,
                to_hi: total - t,
            }
        } else {
            Abscissa {
                x: self.b - t,
                to_lo: total - t,
                to_hi: t,
            }
        };
        (self.f)(pt, weight)
    }
}

/// Callback form that multiplies a plain integrand by the node weight.
fn weighted<F: FnMut(Abscissa) -> f64>(mut f: F) -> impl FnMut(Abscissa, Weight) -> f64 {
    move |p, w| if w.value == 0.0 { 0.0 } else { f(p) * w.value }
}

fn substitution_power(e: Option<f64>) -> Result<f64> {
    match e {
        None => Ok(1.0),
        Some(e) if e <= -1.0 || !e.is_finite() => Err(Error::Domain(format!(
            "endpoint singularity exponent {e} is not integrable"
        ))),
        Some(e) if e.fract() == 0.0 && e >= 0.0 => Ok(1.0),
        // fractional positive power: x = s³ raises the local smoothness
        Some(e) if e > 0.0 => Ok(3.0),
        Some(e) => Ok(1.0 / (1.0 + e)),
    }
}

/// Globally adaptive driver: repeatedly bisects the panel with the largest
/// error until the total error meets the tolerance.
fn adaptive<F: FnMut(Abscissa, Weight) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    sing: EndpointSingularity,
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!(
            "integration limits must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            subdivisions: 0,
            converged: true,
        });
    }
    if a > b {
        let flipped = EndpointSingularity {
            lo: sing.hi,
            hi: sing.lo,
        };
        let mut g = |p: Abscissa, w: Weight| {
            f(
                Abscissa {
                    x: p.x,
                    to_lo: p.to_hi,
                    to_hi: p.to_lo,
                },
                w,
            )
        };
        let r = adaptive_ordered(&mut g, b, a, flipped, spec)?;
        return Ok(QuadResult {
            value: -r.value,
            ..r
        });
    }
    adaptive_ordered(f, a, b, sing, spec)
}

fn adaptive_ordered<F: FnMut(Abscissa, Weight) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    sing: EndpointSingularity,
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    let k_lo = substitution_power(sing.lo)?;
    let k_hi = substitution_power(sing.hi)?;
    let total = b - a;
    let pieces: Vec<Piece> = match (k_lo != 1.0, k_hi != 1.0) {
        (false, false) => vec![Piece {
            from_lo: true,
            len: total,
            k: 1.0,
        }],
        (true, false) => vec![Piece {
            from_lo: true,
            len: total,
            k: k_lo,
        }],
        (false, true) => vec![Piece {
            from_lo: false,
            len: total,
            k: k_hi,
        }],
        (true, true) => vec![
            Piece {
                from_lo: true,
                len: 0.5 * total,
                k: k_lo,
            },
            Piece {
                from_lo: false,
                len: 0.5 * total,
                k: k_hi,
            },
        ],
    };

    let mut mapped = Mapped { f, a, b };
    let mut heap = BinaryHeap::new();
    let mut value = 0.0;
    let mut error = 0.0;
    for (idx, piece) in pieces.iter().enumerate() {
        let (v, e) = gk15(&mut |s| mapped.eval(piece, s), 0.0, 1.0);
        value += v;
        error += e;
        heap.push(Panel {
            piece: idx,
            a: 0.0,
            b: 1.0,
            value: v,
            error: e,
        });
    }
    let mut subdivisions = heap.len();
    loop {
        if error <= spec.target(value) {
            // confirm against an exact resum before stopping
            value = heap.iter().map(|p| p.value).sum();
            error = heap.iter().map(|p| p.error).sum();
            if error <= spec.target(value) {
                break;
            }
        }
        if subdivisions >= spec.max_subdivisions {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let piece = pieces[worst.piece];
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // panel cannot be split further in floating point
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&mut |s| mapped.eval(&piece, s), worst.a, mid);
        let (v2, e2) = gk15(&mut |s| mapped.eval(&piece, s), mid, worst.b);
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Panel {
            piece: worst.piece,
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            piece: worst.piece,
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        subdivisions += 1;
        if subdivisions % 64 == 0 {
            // resum to keep the running totals free of drift
            value = heap.iter().map(|p| p.value).sum();
            error = heap.iter().map(|p| p.error).sum();
        }
    }
    value = heap.iter().map(|p| p.value).sum();
    error = heap.iter().map(|p| p.error).sum();
    if !value.is_finite() {
        return Err(Error::Domain(
            "integrand produced a non-finite value".into(),
        ));
    }
    Ok(QuadResult {
        value,
        abs_error: error,
        subdivisions,
        converged: error <= spec.target(value),
    })
}

/// Adaptive quadrature of a regular integrand over `[a, b]`.
pub fn integrate_1d<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    spec.validate()?;
    adaptive(
        &mut weighted(|p: Abscissa| f(p.x)),
        a,
        b,
        EndpointSingularity::none(),
        spec,
    )?
    .into_result()
}

/// Adaptive quadrature with declared endpoint power singularities.
pub fn integrate_1d_singular<F: Fn(Abscissa) -> f64>(
    f: F,
    a: f64,
    b: f64,
    sing: EndpointSingularity,
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    spec.validate()?;
    adaptive(&mut weighted(&f), a, b, sing, spec)?.into_result()
}

/// Like [`integrate_1d_singular`] but reports non-convergence through
/// `QuadResult::converged` instead of an error. Used by nested integrals.
pub(crate) fn integrate_1d_lenient<F: FnMut(Abscissa) -> f64>(
    f: F,
    a: f64,
    b: f64,
    sing: EndpointSingularity,
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    adaptive(&mut weighted(f), a, b, sing, spec)
}

/// Lenient pass whose callback applies the node weight itself.
fn integrate_weighted<F: FnMut(Abscissa, Weight) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    sing: EndpointSingularity,
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    adaptive(&mut f, a, b, sing, spec)
}

/// A point of the unit cube with the exact complements the integrand may
/// need near its singular sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubePoint {
    pub u: f64,
    pub w: f64,
    pub v: f64,
    /// |u - v|, exact near the diagonal.
    pub abs_u_minus_v: f64,
    /// 1 - w, exact near w = 1.
    pub one_minus_w: f64,
}

/// Declared singular behaviour of a cube integrand. Exponents describe the
/// leading power near each set; `None` means regular.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubeSingularities {
    pub u_lo: Option<f64>,
    /// Singularity on the diagonal {u = v}.
    pub diag: Option<f64>,
    pub w_lo: Option<f64>,
    pub w_hi: Option<f64>,
    pub v_lo: Option<f64>,
    /// Split the w-pass at w = v (for integrands with a kink there).
    pub split_w_at_v: bool,
    /// Integrate the pieces u > v and w > v in log scale, `x = v^{1−σ}`.
    /// Resolves integrands that behave like a power of x on scales
    /// comparable to a small v.
    pub log_scale_above_v: bool,
}

impl Default for CubeSingularities {
    fn default() -> Self {
        Self {
            u_lo: Some(-0.5),
            diag: Some(-0.5),
            w_lo: Some(-0.5),
            w_hi: Some(-0.5),
            v_lo: Some(-0.5),
            split_w_at_v: true,
            log_scale_above_v: true,
        }
    }
}

/// Triple integral over (0,1]³ with the conservative default singularity
/// declaration.
pub fn integrate_unit_cube_3d<F: Fn(&CubePoint) -> f64>(
    f: F,
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    integrate_unit_cube_3d_with(f, &CubeSingularities::default(), spec)
}

/// Accumulates inner-pass diagnostics of a nested integral.
#[derive(Default)]
struct InnerStats {
    unconverged: usize,
    failure: Option<Error>,
}

impl InnerStats {
    fn record(&mut self, r: &QuadResult) {
        self.unconverged += usize::from(!r.converged);
    }
}

/// Integrates over `x in [v, 1]` via `x = v e^{Lσ}`, `L = −ln v`.
/// `f` receives `(x, x − v, 1 − x)`, all computed without cancellation,
/// and the log-Jacobian of the map, which it must apply itself.
fn log_scale_piece<F: FnMut(f64, f64, f64, f64) -> f64>(
    mut f: F,
    v: f64,
    sing: EndpointSingularity,
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    let ln_v = v.ln();
    let big_l = -ln_v;
    integrate_weighted(
        |p: Abscissa, w: Weight| {
            let ln_x = ln_v * p.to_hi;
            let x = ln_x.exp();
            let above = v * (big_l * p.to_lo).exp_m1();
            let below = -ln_x.exp_m1();
            f(x, above, below, w.ln + ln_x + big_l.ln())
        },
        0.0,
        1.0,
        sing,
        spec,
    )
}

/// Triple integral over (0,1]³ as nested adaptive passes: innermost over u
/// (split at the diagonal u = v), then w, then v.
pub fn integrate_unit_cube_3d_with<F: Fn(&CubePoint) -> f64>(
    f: F,
    sing: &CubeSingularities,
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    cube(
        |p, ln_w| {
            let w = ln_w.exp();
            if w == 0.0 {
                0.0
            } else {
                f(p) * w
            }
        },
        sing,
        spec,
    )
}

/// Like [`integrate_unit_cube_3d_with`] for a positive integrand given by
/// its logarithm. The Jacobians of all three passes are combined with
/// `ln_f` before exponentiation, so factors that would overflow or
/// underflow separately are still resolved.
pub fn integrate_unit_cube_3d_log<F: Fn(&CubePoint) -> f64>(
    ln_f: F,
    sing: &CubeSingularities,
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    cube(|p, ln_w| (ln_f(p) + ln_w).exp(), sing, spec)
}

/// Shared driver; `g(point, ln_weight)` returns the integrand times the
/// product of all node weights.
fn cube<G: Fn(&CubePoint, f64) -> f64>(
    g: G,
    sing: &CubeSingularities,
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    spec.validate()?;
    let inner_spec = spec.tightened(10.0);
    let mut stats = InnerStats::default();

    let u_pass =
        |w: f64, one_minus_w: f64, v: f64, ln_outer: f64, stats: &mut InnerStats| -> Result<f64> {
            let mut total = 0.0;
            let point = |u: f64, d: f64| CubePoint {
                u,
                w,
                v,
                abs_u_minus_v: d,
                one_minus_w,
            };
            // u in (0, v): distance to the diagonal is the upper-end distance
            let r = integrate_weighted(
                |p: Abscissa, wt: Weight| g(&point(p.x, p.to_hi), ln_outer + wt.ln),
                0.0,
                v,
                EndpointSingularity {
                    lo: sing.u_lo,
                    hi: sing.diag,
                },
                &inner_spec,
            )?;
            stats.record(&r);
            total += r.value;
            if v < 1.0 {
                let es = EndpointSingularity {
                    lo: sing.diag,
                    hi: None,
                };
                let r = if sing.log_scale_above_v {
                    log_scale_piece(
                        |u, above, _, ln_j| g(&point(u, above), ln_outer + ln_j),
                        v,
                        es,
                        &inner_spec,
                    )?
                } else {
                    integrate_weighted(
                        |p: Abscissa, wt: Weight| g(&point(p.x, p.to_lo), ln_outer + wt.ln),
                        v,
                        1.0,
                        es,
                        &inner_spec,
                    )?
                };
                stats.record(&r);
                total += r.value;
            }
            Ok(total)
        };

    let w_pass = |v: f64, ln_v_weight: f64, stats: &mut InnerStats| -> Result<f64> {
        let failure = std::cell::RefCell::new(None);
        let inner = |w: f64, one_minus_w: f64, ln_w: f64, stats: &mut InnerStats| -> f64 {
            if failure.borrow().is_some() {
                return 0.0;
            }
            u_pass(w, one_minus_w, v, ln_v_weight + ln_w, stats).unwrap_or_else(|e| {
                *failure.borrow_mut() = Some(e);
                0.0
            })
        };
        let mut total = 0.0;
        let mut local = InnerStats::default();
        if sing.split_w_at_v && v < 1.0 {
            let r = integrate_weighted(
                |p: Abscissa, wt: Weight| inner(p.x, 1.0 - p.x, wt.ln, stats),
                0.0,
                v,
                EndpointSingularity {
                    lo: sing.w_lo,
                    hi: None,
                },
                &inner_spec,
            )?;
            local.record(&r);
            total += r.value;
            let es = EndpointSingularity {
                lo: None,
                hi: sing.w_hi,
            };
            let r = if sing.log_scale_above_v {
                log_scale_piece(
                    |w, _, below, ln_j| inner(w, below, ln_j, stats),
                    v,
                    es,
                    &inner_spec,
                )?
            } else {
                integrate_weighted(
                    |p: Abscissa, wt: Weight| inner(p.x, p.to_hi, wt.ln, stats),
                    v,
                    1.0,
                    es,
                    &inner_spec,
                )?
            };
            local.record(&r);
            total += r.value;
        } else {
            let r = integrate_weighted(
                |p: Abscissa, wt: Weight| inner(p.x, p.to_hi, wt.ln, stats),
                0.0,
                1.0,
                EndpointSingularity {
                    lo: sing.w_lo,
                    hi: sing.w_hi,
                },
                &inner_spec,
            )?;
            local.record(&r);
            total += r.value;
        }
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        stats.unconverged += local.unconverged;
        Ok(total)
    };

    let outer = integrate_weighted(
        |p: Abscissa, wt: Weight| {
            if stats.failure.is_some() {
                return 0.0;
            }
            let mut s = std::mem::take(&mut stats);
            let out = match w_pass(p.x, wt.ln, &mut s) {
                Ok(x) => x,
                Err(e) => {
                    s.failure = Some(e);
                    0.0
                }
            };
            stats = s;
            out
        },
        0.0,
        1.0,
        EndpointSingularity {
            lo: sing.v_lo,
            hi: None,
        },
        spec,
    )?;
    if let Some(e) = stats.failure {
        return Err(e);
    }
    // every inner pass met its own tolerance, so the two nested levels add
    // at most this much on top of the outer estimate
    let abs_error = outer.abs_error + 2.0 * inner_spec.target(outer.value);
    QuadResult {
        value: outer.value,
        abs_error,
        subdivisions: outer.subdivisions,
        converged: outer.converged && stats.unconverged == 0,
    }
    .into_result()
}
