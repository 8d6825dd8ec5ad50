//! Closed-form and quadrature-defined quantities of the fOU₂ law.
//!
//! With `p = (θ−1)H + 1`, `q = 2H − 1`, `K = (2H−1)H^{2H}/(2θ)` and
//! `g(s) = e^{−s(1/H−1)} (1 − e^{−s/H})^{2H−2}` the stationary covariance is
//!
//! ```text
//! c(t) = K [ e^{−θt} B(p, q) + (1/H) ∫₀^∞ e^{−θ|t−s|} g(s) ds ]
//! ```
//!
//! which is evaluated as `K [e^{−θt} B + e^{θt} B_x(p, q) + (1/H) ∫₀ᵗ e^{−θ(t−s)} g(s) ds]`
//! with `x = e^{−t/H}` and `B_x` the incomplete beta integral.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quadrature::integrate_1d_lenient;
use crate::numerics::{
    find_root_decreasing, integrate_1d_singular, integrate_unit_cube_3d_log, Abscissa, CubePoint,
    CubeSingularities, EndpointSingularity, QuadratureSpec,
};
use crate::specfun::{digamma_unchecked, ln_beta_unchecked, ln_incomplete_beta};

/// Drift `theta > 0` and Hurst index `1/2 < hurst < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct ModelParams {
    theta: f64,
    hurst: f64,
}

#[derive(Deserialize)]
struct RawParams {
    theta: f64,
    hurst: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        Self::new(raw.theta, raw.hurst)
    }
}

pub fn validate_hurst(hurst: f64) -> Result<()> {
    if hurst > 0.5 && hurst < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "hurst must lie in the open interval (1/2, 1), got {hurst}"
        )))
    }
}

impl ModelParams {
    pub fn new(theta: f64, hurst: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::Parameter(format!(
                "theta must be positive and finite, got {theta}"
            )));
        }
        validate_hurst(hurst)?;
        Ok(Self { theta, hurst })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    /// α_H = H(2H − 1).
    pub fn alpha_h(&self) -> f64 {
        self.hurst * (2.0 * self.hurst - 1.0)
    }

    /// Time change a_t = H e^{t/H}.
    pub fn time_change(&self, t: f64) -> f64 {
        self.hurst * (t / self.hurst).exp()
    }

    /// Exponential decay rate of c(t): min(θ, (1 − H)/H).
    pub fn decay_rate(&self) -> f64 {
        self.theta.min((1.0 - self.hurst) / self.hurst)
    }

    fn beta_args(&self) -> (f64, f64) {
        (
            (self.theta - 1.0) * self.hurst + 1.0,
            2.0 * self.hurst - 1.0,
        )
    }

    fn k_const(&self) -> f64 {
        let h = self.hurst;
        (2.0 * h - 1.0) * h.powf(2.0 * h) / (2.0 * self.theta)
    }
}

/// Ergodic limit Ψ(θ) = (2H−1)H^{2H} B((θ−1)H+1, 2H−1)/θ.
pub fn psi(params: ModelParams) -> f64 {
    let h = params.hurst;
    let (p, q) = params.beta_args();
    ((2.0 * h - 1.0).ln() + 2.0 * h * h.ln() + ln_beta_unchecked(p, q) - params.theta.ln()).exp()
}

/// Ψ′(θ) = Ψ(θ) [−1/θ + H(ψ₀((θ−1)H+1) − ψ₀((θ+1)H))].
pub fn psi_prime(params: ModelParams) -> f64 {
    let h = params.hurst;
    let (p, _) = params.beta_args();
    let bracket = -1.0 / params.theta
        + h * (digamma_unchecked(p) - digamma_unchecked((params.theta + 1.0) * h));
    psi(params) * bracket
}

/// Largest/smallest `mu` accepted by [`psi_inverse`].
pub const PSI_INVERSE_RANGE: (f64, f64) = (1e-12, 1e12);

/// The unique θ > 0 with Ψ(θ; H) = mu.
pub fn psi_inverse(mu: f64, hurst: f64) -> Result<f64> {
    validate_hurst(hurst)?;
    if !(mu >= PSI_INVERSE_RANGE.0 && mu <= PSI_INVERSE_RANGE.1) {
        return Err(Error::Bracket(format!(
            "mu = {mu} outside the invertible range [{:e}, {:e}]",
            PSI_INVERSE_RANGE.0, PSI_INVERSE_RANGE.1
        )));
    }
    let f = |theta: f64| psi(ModelParams { theta, hurst });
    find_root_decreasing(f, mu, 1e-6, 1.0, 1e-12).map_err(|e| match e {
        Error::Bracket(msg) => Error::Bracket(format!("mu outside range: {msg}")),
        other => other,
    })
}

fn covariance_spec() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 1e-300,
        rel_tol: 1e-12,
        max_subdivisions: 4000,
    }
}

fn check_lag(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "lag must be finite and non-negative, got {t}"
        )))
    }
}

/// g(s) written in terms of the exact distance `s` to the origin.
#[inline]
fn g_kernel(h: f64, s: f64) -> f64 {
    (-s * (1.0 / h - 1.0)).exp() * (-(-s / h).exp_m1()).powf(2.0 * h - 2.0)
}

/// (1/H) ∫₀ᵗ w(t − s) g(s) ds for a weight given as a function of t − s.
fn g_convolution<W: Fn(f64) -> f64>(params: ModelParams, t: f64, weight: W) -> Result<f64> {
    let h = params.hurst;
    let r = integrate_1d_singular(
        |p: Abscissa| weight(p.to_hi) * g_kernel(h, p.to_lo),
        0.0,
        t,
        EndpointSingularity::lo(2.0 * h - 2.0),
        &covariance_spec(),
    )?;
    Ok(r.value / h)
}

/// Stationary covariance c(t) = Cov(U_s, U_{s+t}).
pub fn stationary_covariance(params: ModelParams, t: f64) -> Result<f64> {
    check_lag(t)?;
    if t == 0.0 {
        return Ok(psi(params));
    }
    let theta = params.theta;
    let h = params.hurst;
    let (p, q) = params.beta_args();
    let k = params.k_const();
    let ln_b = ln_beta_unchecked(p, q);
    let ln_inc = ln_incomplete_beta((-t / h).exp(), p, q)?;
    let head = (-theta * t + ln_b).exp() + (theta * t + ln_inc).exp();
    let tail = g_convolution(params, t, |d| (-theta * d).exp())?;
    Ok(k * (head + tail))
}

/// Variogram v(t) = c(0) − c(t).
///
/// For θt ≤ 1 it is computed without cancellation as
/// `K [(2/H) ∫₀ᵗ sinh(θ(t−s)) g(s) ds − 4B sinh²(θt/2)]`.
pub fn variogram(params: ModelParams, t: f64) -> Result<f64> {
    check_lag(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let theta = params.theta;
    if theta * t > 1.0 {
        return Ok(psi(params) - stationary_covariance(params, t)?);
    }
    let (p, q) = params.beta_args();
    let b = ln_beta_unchecked(p, q).exp();
    let conv = g_convolution(params, t, |d| (theta * d).sinh())?;
    let sh = (0.5 * theta * t).sinh();
    Ok(params.k_const() * (2.0 * conv - 4.0 * b * sh * sh))
}

/// Ψ, Ψ′(θ), σ² and σ_θ² at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub psi: f64,
    pub psi_prime: f64,
    pub sigma2: f64,
    pub sigma_theta2: f64,
    pub quadrature_error: f64,
}

/// σ² with its quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sigma2 {
    pub value: f64,
    pub abs_error: f64,
}

/// Hurst range on which the σ² quadrature is supported. Closer to 1/2 the
/// mass of (1 − w)^{2H−2} sits at distances below double precision range.
pub const SIGMA2_HURST_RANGE: (f64, f64) = (0.51, 0.99);

/// Asymptotic variance of √T (T⁻¹∫₀ᵀ X_t² dt − Ψ), evaluated on the unit
/// cube after u = e^{−x/H}, w = e^{−y/H}, v = e^{−z/H}.
pub fn sigma2(params: ModelParams, spec: &QuadratureSpec) -> Result<Sigma2> {
    let (h_lo, h_hi) = SIGMA2_HURST_RANGE;
    if !(params.hurst >= h_lo && params.hurst <= h_hi) {
        return Err(Error::Domain(format!(
            "σ² quadrature supports {h_lo} <= H <= {h_hi}, got H = {}",
            params.hurst
        )));
    }
    let theta = params.theta;
    let h = params.hurst;
    let alpha = params.alpha_h();
    let pref = 2.0 * alpha * alpha * h.powf(4.0 * h - 1.0) / (theta * theta);
    let e_u = (theta - 1.0) * h;
    let e_sing = 2.0 * h - 2.0;
    let th = theta * h;
    let ln_integrand = |p: &CubePoint| {
        let ln_ratio = if p.w < p.v {
            p.w.ln() - p.v.ln()
        } else {
            p.v.ln() - p.w.ln()
        };
        e_u * p.u.ln() - h * (p.w.ln() + p.v.ln())
            + th * ln_ratio
            + e_sing * (p.one_minus_w.ln() + p.abs_u_minus_v.ln())
    };
    let sing = CubeSingularities {
        u_lo: Some(e_u),
        diag: Some(e_sing),
        w_lo: Some(e_u),
        w_hi: Some(e_sing),
        v_lo: Some(-h + (1.0 - h).min(th)),
        split_w_at_v: true,
        log_scale_above_v: true,
    };
    let r = integrate_unit_cube_3d_log(ln_integrand, &sing, spec)?;
    Ok(Sigma2 {
        value: pref * r.value,
        abs_error: pref * r.abs_error,
    })
}

fn nested<F: FnMut(Abscissa) -> Result<f64>>(
    mut f: F,
    a: f64,
    b: f64,
    sing: EndpointSingularity,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let failure = RefCell::new(None);
    let r = integrate_1d_lenient(
        |p| {
            if failure.borrow().is_some() {
                return 0.0;
            }
            f(p).unwrap_or_else(|e| {
                *failure.borrow_mut() = Some(e);
                0.0
            })
        },
        a,
        b,
        sing,
        spec,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    if !r.converged {
        return Err(Error::NonConvergence {
            subdivisions: r.subdivisions,
            value: r.value,
            error: r.abs_error,
        });
    }
    Ok((r.value, r.abs_error))
}

/// σ² by direct quadrature of the defining triple integral over
/// `[0, horizon]³` in the original time coordinates. Slower than [`sigma2`];
/// used to cross-check the unit-cube transform.
pub fn sigma2_truncated(
    params: ModelParams,
    horizon: f64,
    spec: &QuadratureSpec,
) -> Result<Sigma2> {
    spec.validate()?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Domain(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let theta = params.theta;
    let h = params.hurst;
    let alpha = params.alpha_h();
    let pref = 2.0 * alpha * alpha * h.powf(4.0 * h - 4.0) / (theta * theta);
    let e = 2.0 * h - 2.0;
    let drift = 1.0 - 1.0 / h;
    let inner_spec = spec.tightened(10.0);
    let l = horizon;

    // f(x, y, z) given |x − z| and |y − z| exactly
    let f = |x: f64, y: f64, z: f64, dxz: f64, dyz: f64| {
        let ln = -theta * x - theta * dyz
            + drift * (x + y + z)
            + e * ((-(-y / h).exp_m1()).ln() - x.min(z) / h + (-(-dxz / h).exp_m1()).ln());
        ln.exp()
    };
    let x_pass = |y: f64, z: f64, dyz: f64| -> Result<f64> {
        let mut total = 0.0;
        if z > 0.0 {
            total += nested(
                |p| Ok(f(p.x, y, z, p.to_hi, dyz)),
                0.0,
                z,
                EndpointSingularity::hi(e),
                &inner_spec,
            )?
            .0;
        }
        if z < l {
            total += nested(
                |p| Ok(f(p.x, y, z, p.to_lo, dyz)),
                z,
                l,
                EndpointSingularity::lo(e),
                &inner_spec,
            )?
            .0;
        }
        Ok(total)
    };
    let y_pass = |z: f64| -> Result<f64> {
        let mut total = 0.0;
        if z > 0.0 {
            total += nested(
                |p| x_pass(p.x, z, p.to_hi),
                0.0,
                z,
                EndpointSingularity::lo(e),
                &inner_spec,
            )?
            .0;
        }
        if z < l {
            total += nested(
                |p| x_pass(p.x, z, p.to_lo),
                z,
                l,
                EndpointSingularity::none(),
                &inner_spec,
            )?
            .0;
        }
        Ok(total)
    };
    let (value, err) = nested(|p| y_pass(p.x), 0.0, l, EndpointSingularity::none(), spec)?;
    Ok(Sigma2 {
        value: pref * value,
        abs_error: pref * err,
    })
}

/// Ψ, Ψ′, σ² and σ_θ² = σ²/Ψ′² at `params`.
pub fn sigma_theta2(params: ModelParams, spec: &QuadratureSpec) -> Result<AsymptoticReport> {
    let s2 = sigma2(params, spec)?;
    let pp = psi_prime(params);
    Ok(AsymptoticReport {
        psi: psi(params),
        psi_prime: pp,
        sigma2: s2.value,
        sigma_theta2: s2.value / (pp * pp),
        quadrature_error: s2.abs_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate_1d;
    use proptest::prelude::*;

    const H_GRID: [f64; 9] = [0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95];

    fn mp(theta: f64, hurst: f64) -> ModelParams {
        ModelParams::new(theta, hurst).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    /// c(t) at θ = 1, where U_t = e^{−t} B_{a_t} exactly.
    fn covariance_theta_one(h: f64, t: f64) -> f64 {
        h.powf(2.0 * h) * (t.cosh() - 0.5 * (-t).exp() * (t / h).exp_m1().powf(2.0 * h))
    }

    #[test]
    fn parameter_validation() {
        assert!(ModelParams::new(1.0, 0.5).is_err());
        assert!(ModelParams::new(1.0, 1.0).is_err());
        assert!(ModelParams::new(0.0, 0.7).is_err());
        assert!(ModelParams::new(f64::NAN, 0.7).is_err());
        assert!(matches!(
            ModelParams::new(1.0, 0.4),
            Err(Error::Parameter(_))
        ));
        let p: Result<ModelParams, _> = serde_json::from_str(r#"{"theta":1.0,"hurst":0.3}"#);
        assert!(p.is_err());
        let p: ModelParams = serde_json::from_str(r#"{"theta":2.0,"hurst":0.6}"#).unwrap();
        assert_eq!(p, mp(2.0, 0.6));
    }

    #[test]
    fn psi_at_one_is_h_to_2h() {
        for h in H_GRID {
            assert!(rel(psi(mp(1.0, h)), h.powf(2.0 * h)) < 1e-12);
        }
        assert!((psi(mp(1.0, 0.7)) - 0.606_928_115_066_786_4).abs() < 1e-14);
    }

    #[test]
    fn psi_matches_quadrature() {
        let (theta, h) = (2.0, 0.7);
        let spec = QuadratureSpec::new(1e-15, 1e-13, 2000).unwrap();
        let b = integrate_1d_singular(
            |p| p.to_lo.powf((theta - 1.0) * h) * p.to_hi.powf(2.0 * h - 2.0),
            0.0,
            1.0,
            EndpointSingularity::hi(2.0 * h - 2.0),
            &spec,
        )
        .unwrap()
        .value;
        let want = (2.0 * h - 1.0) * h.powf(2.0 * h) * b / theta;
        assert!(rel(psi(mp(theta, h)), want) < 1e-11);
    }

    #[test]
    fn psi_strictly_decreasing() {
        for h in H_GRID {
            let mut prev = f64::INFINITY;
            for k in 1..=100 {
                let v = psi(mp(0.1 * k as f64, h));
                assert!(v < prev, "H={h} k={k}");
                prev = v;
            }
        }
    }

    #[test]
    fn psi_prime_matches_finite_difference() {
        let hd = 1e-6;
        for &(theta, h) in &[
            (1.0, 0.7),
            (0.5, 0.6),
            (2.5, 0.55),
            (5.0, 0.9),
            (0.25, 0.95),
        ] {
            let fd = (psi(mp(theta + hd, h)) - psi(mp(theta - hd, h))) / (2.0 * hd);
            let an = psi_prime(mp(theta, h));
            assert!(an < 0.0);
            assert!(rel(an, fd) < 1e-6, "θ={theta} H={h}: {an} vs {fd}");
        }
    }

    #[test]
    fn psi_inverse_examples() {
        let h = 0.7f64;
        assert!((psi_inverse(h.powf(2.0 * h), h).unwrap() - 1.0).abs() < 1e-10);
        let x = psi_inverse(psi(mp(2.5, 0.55)), 0.55).unwrap();
        assert!((x - 2.5).abs() < 1e-8);
        assert!(psi_inverse(0.0, 0.7).is_err());
        assert!(psi_inverse(1e13, 0.7).is_err());
        assert!(psi_inverse(0.3, 0.5).is_err());
    }

    #[test]
    fn psi_inverse_matches_grid_search() {
        // brute-force grid over [1e-4, 50], then bisection on the best cell
        let (mu, h) = (0.3, 0.7);
        let n = 50_000;
        let grid: Vec<f64> = (0..=n)
            .map(|i| 1e-4 + (50.0 - 1e-4) * i as f64 / n as f64)
            .collect();
        let i = grid.iter().position(|&t| psi(mp(t, h)) < mu).unwrap();
        let (mut lo, mut hi) = (grid[i - 1], grid[i]);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if psi(mp(mid, h)) > mu {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let want = 0.5 * (lo + hi);
        assert!(rel(psi_inverse(mu, h).unwrap(), want) < 1e-10);
    }

    #[test]
    fn psi_inverse_round_trip_grid() {
        for h in H_GRID {
            for theta in [0.1, 0.25, 0.5, 1.0, 2.5, 5.0, 10.0] {
                let back = psi_inverse(psi(mp(theta, h)), h).unwrap();
                assert!(
                    (back - theta).abs() < 1e-8 * theta.max(1.0),
                    "θ={theta} H={h}"
                );
            }
        }
    }

    #[test]
    fn covariance_at_zero_is_psi() {
        for h in H_GRID {
            for theta in [0.25, 1.0, 5.0] {
                let p = mp(theta, h);
                assert!(rel(stationary_covariance(p, 0.0).unwrap(), psi(p)) < 1e-12);
                // continuity from the right
                assert!(rel(stationary_covariance(p, 1e-12).unwrap(), psi(p)) < 1e-6);
            }
        }
        assert!(stationary_covariance(mp(1.0, 0.7), -1.0).is_err());
    }

    #[test]
    fn covariance_matches_theta_one_closed_form() {
        for h in [0.55, 0.7, 0.9] {
            for t in [1e-3, 0.1, 0.5, 2.0, 4.0] {
                let got = stationary_covariance(mp(1.0, h), t).unwrap();
                let want = covariance_theta_one(h, t);
                assert!(rel(got, want) < 1e-9, "H={h} t={t}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn covariance_matches_double_integral() {
        // c(t) = C e^{−θt} ∫₀^{a_t} ∫₀^{a_0} (xy)^{(θ−1)H} |x−y|^{2H−2} dx dy
        let (theta, h, t) = (1.0, 0.7, 0.5);
        let p = mp(theta, h);
        let (a0, at) = (p.time_change(0.0), p.time_change(t));
        let e = (theta - 1.0) * h;
        let d = 2.0 * h - 2.0;
        let spec = QuadratureSpec::new(1e-14, 1e-11, 4000).unwrap();
        let inner = |y: f64| {
            let left = integrate_1d_singular(
                |q| q.x.powf(e) * q.to_hi.powf(d),
                0.0,
                y.min(a0),
                EndpointSingularity::hi(if y <= a0 { d } else { 0.0 }),
                &spec,
            )
            .unwrap()
            .value;
            let right = if y < a0 {
                integrate_1d_singular(
                    |q| q.x.powf(e) * q.to_lo.powf(d),
                    y,
                    a0,
                    EndpointSingularity::lo(d),
                    &spec,
                )
                .unwrap()
                .value
            } else {
                0.0
            };
            y.powf(e) * (left + right)
        };
        // y ∈ (0, a_t); the inner integral has a kink at y = a_0
        let i1 = integrate_1d(inner, 0.0, a0, &spec).unwrap().value;
        let i2 = integrate_1d(
            |y| {
                // for y > a_0 the x-range stays below y
                let v = integrate_1d_singular(
                    |q| q.x.powf(e) * ((y - a0) + q.to_hi).powf(d),
                    0.0,
                    a0,
                    EndpointSingularity::hi(d),
                    &spec,
                )
                .unwrap()
                .value;
                y.powf(e) * v
            },
            a0,
            at,
            &spec,
        )
        .unwrap()
        .value;
        let c =
            h * (2.0 * h - 1.0) * h.powf(2.0 * h * (1.0 - theta)) * (-theta * t).exp() * (i1 + i2);
        assert!(rel(c, 0.489_224_253_635_460_7) < 1e-7, "{c}");
        assert!(
            rel(
                stationary_covariance(p, t).unwrap(),
                0.489_224_253_635_460_7
            ) < 1e-11
        );
    }

    #[test]
    fn covariance_decay() {
        let p = mp(1.0, 0.7);
        assert!(stationary_covariance(p, 50.0).unwrap().abs() < 1e-8);
        for &(theta, h) in &[(1.0, 0.7), (2.0, 0.55), (0.5, 0.9), (0.2, 0.6)] {
            let p = mp(theta, h);
            let r = p.decay_rate();
            let scaled: Vec<f64> = (1..=6)
                .map(|k| {
                    let t = 10.0 * k as f64;
                    let c = stationary_covariance(p, t).unwrap();
                    assert!(c > 0.0);
                    c * (0.99 * r * t).exp()
                })
                .collect();
            for w in scaled.windows(2) {
                assert!(w[1] <= w[0] * 1.000_001, "θ={theta} H={h}: {scaled:?}");
            }
        }
    }

    #[test]
    fn variogram_small_lag_law() {
        // v(t) ~ t^{2H}/2: at θ = 1, U_t = e^{−t}B_{a_t} gives
        // v(t) = H^{2H}[1 − cosh t + ½e^{−t}(e^{t/H} − 1)^{2H}] → ½t^{2H}
        for &(theta, h) in &[(1.0, 0.7), (2.0, 0.55), (0.5, 0.9)] {
            let p = mp(theta, h);
            let mut prev_gap = f64::INFINITY;
            for t in [1e-1, 1e-2, 1e-3, 1e-4] {
                let ratio = variogram(p, t).unwrap() / (0.5 * t.powf(2.0 * h));
                let gap = (ratio - 1.0).abs();
                assert!(gap < prev_gap, "θ={theta} H={h} t={t}: {ratio}");
                prev_gap = gap;
            }
            if h <= 0.7 {
                assert!(prev_gap < 0.02, "θ={theta} H={h}: {prev_gap}");
            }
        }
        // the relative correction is O(t^{2−2H}), slow for H near 1
        let p = mp(0.5, 0.9);
        let gap = |t: f64| (variogram(p, t).unwrap() / (0.5 * t.powf(1.8)) - 1.0).abs();
        let shrink = gap(1e-4) / gap(1e-3);
        assert!((0.5..0.75).contains(&shrink), "{shrink}");
    }

    #[test]
    fn variogram_limits() {
        let p = mp(1.0, 0.7);
        assert_eq!(variogram(p, 0.0).unwrap(), 0.0);
        assert!((variogram(p, 60.0).unwrap() - psi(p)).abs() < 1e-8);
        // both branches agree where they meet
        for &(theta, h) in &[(1.0, 0.7), (2.0, 0.55)] {
            let q = mp(theta, h);
            let t = 1.0 / theta;
            let direct = variogram(q, t).unwrap();
            let diff = psi(q) - stationary_covariance(q, t).unwrap();
            assert!(rel(direct, diff) < 1e-11);
        }
        let h = 0.7f64;
        for t in [1e-3, 0.3, 0.9] {
            let want = h.powf(2.0 * h) - covariance_theta_one(h, t);
            assert!(rel(variogram(p, t).unwrap(), want) < 1e-6);
        }
    }

    /// Independent oracle: σ² = 4 ∫₀^∞ c(t)² dt.
    fn sigma2_from_covariance(p: ModelParams) -> f64 {
        let spec = QuadratureSpec::new(1e-14, 1e-8, 2000).unwrap();
        let horizon = 40.0 / p.decay_rate();
        4.0 * integrate_1d(
            |t| stationary_covariance(p, t).unwrap().powi(2),
            0.0,
            horizon,
            &spec,
        )
        .unwrap()
        .value
    }

    #[test]
    fn sigma2_matches_covariance_oracle() {
        for &(theta, h) in &[(1.0, 0.7), (2.0, 0.55), (0.5, 0.8)] {
            let p = mp(theta, h);
            let s = sigma2(p, &QuadratureSpec::default()).unwrap();
            let want = sigma2_from_covariance(p);
            assert!(
                rel(s.value, want) < 1e-5,
                "θ={theta} H={h}: {} vs {want}",
                s.value
            );
            assert!(s.abs_error >= 0.0 && s.abs_error < 1e-4 * s.value);
        }
    }

    #[test]
    fn sigma2_reference_values() {
        // 4∫c² in 120-digit arithmetic (θ = 1) and 25-digit (θ = 2)
        for &(theta, h, want) in &[
            (1.0, 0.7, 1.522_139_731_782_12),
            (1.0, 0.55, 0.633_992_018_932_525),
            (2.0, 0.7, 0.126_235_786_3),
        ] {
            let s = sigma2(mp(theta, h), &QuadratureSpec::default())
                .unwrap()
                .value;
            assert!(rel(s, want) < 1e-6, "θ={theta} H={h}: {s}");
        }
    }

    #[test]
    fn sigma2_stable_under_tighter_tolerance() {
        let p = mp(1.0, 0.7);
        let spec = QuadratureSpec::default();
        let a = sigma2(p, &spec).unwrap().value;
        let b = sigma2(p, &spec.tightened(10.0)).unwrap().value;
        assert!(rel(a, b) < 1e-4);
    }

    #[test]
    fn sigma2_truncated_agrees() {
        let p = mp(1.0, 0.7);
        let spec = QuadratureSpec::new(1e-10, 1e-5, 20_000).unwrap();
        let direct = sigma2_truncated(p, 40.0, &spec).unwrap().value;
        let cube = sigma2(p, &QuadratureSpec::default()).unwrap().value;
        assert!(rel(direct, cube) < 1e-3, "{direct} vs {cube}");
    }

    #[test]
    fn report_consistency() {
        let p = mp(1.0, 0.7);
        let r = sigma_theta2(p, &QuadratureSpec::default()).unwrap();
        assert_eq!(r.psi, psi(p));
        assert_eq!(r.sigma_theta2, r.sigma2 / (r.psi_prime * r.psi_prime));
        assert!(r.psi_prime < 0.0 && r.sigma2 > 0.0 && r.quadrature_error >= 0.0);
    }

    #[test]
    fn sigma2_hurst_range() {
        let spec = QuadratureSpec::default();
        assert!(matches!(
            sigma2(mp(1.0, 0.505), &spec),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            sigma2(mp(1.0, 0.995), &spec),
            Err(Error::Domain(_))
        ));
        assert!(sigma2(mp(1.0, 0.99), &spec).unwrap().value > 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn psi_inverse_round_trip(theta in 0.05f64..20.0, h in 0.51f64..0.99) {
            let back = psi_inverse(psi(mp(theta, h)), h).unwrap();
            prop_assert!((back - theta).abs() <= 1e-8 * theta.max(1.0));
        }

        #[test]
        fn covariance_bounded_by_variance(theta in 0.1f64..5.0, h in 0.51f64..0.99, t in 0.0f64..30.0) {
            let p = mp(theta, h);
            let c = stationary_covariance(p, t).unwrap();
            prop_assert!(c > 0.0 && c <= psi(p) * (1.0 + 1e-12));
            prop_assert!(variogram(p, t).unwrap() >= 0.0);
        }
    }
}
