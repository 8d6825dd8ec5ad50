//! Estimators of θ (known or unknown H) and of H from discrete observations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{psi_inverse, sigma_theta2, validate_hurst, ModelParams, SIGMA2_HURST_RANGE};
use crate::numerics::QuadratureSpec;
use crate::simulate::ObservedPath;

/// Tolerance for the vanishing-moment conditions of a filter.
pub const MOMENT_TOL: f64 = 1e-12;
/// Ĥ is clamped to this interval before inverting Ψ.
pub const HURST_CLAMP: (f64, f64) = (0.501, 0.999);
const Z95: f64 = 1.96;

/// Finite-difference filter a₀…a_L of order p.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFilter", into = "RawFilter")]
pub struct Filter {
    coeffs: Vec<f64>,
    order: usize,
}

#[derive(Serialize, Deserialize)]
struct RawFilter {
    coeffs: Vec<f64>,
    order: usize,
}

impl TryFrom<RawFilter> for Filter {
    type Error = Error;
    fn try_from(raw: RawFilter) -> Result<Self> {
        Filter::new(raw.coeffs, raw.order)
    }
}

impl From<Filter> for RawFilter {
    fn from(f: Filter) -> Self {
        RawFilter {
            coeffs: f.coeffs,
            order: f.order,
        }
    }
}

/// Σ_j a_j j^q and the matching scale Σ_j |a_j| j^q.
fn moment(coeffs: &[f64], q: usize) -> (f64, f64) {
    coeffs
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(s, scale), (j, a)| {
            let jq = (j as f64).powi(q as i32);
            (s + a * jq, scale + a.abs() * jq)
        })
}

impl Filter {
    pub fn new(coeffs: Vec<f64>, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::Config("filter order must be positive".into()));
        }
        if coeffs.len() < 2 {
            return Err(Error::Config(
                "a filter needs at least two coefficients".into(),
            ));
        }
        if coeffs.iter().any(|a| !a.is_finite()) {
            return Err(Error::Config("filter coefficients must be finite".into()));
        }
        for q in 0..order {
            let (s, scale) = moment(&coeffs, q);
            if s.abs() > MOMENT_TOL * scale.max(1.0) {
                return Err(Error::Config(format!(
                    "filter moment of degree {q} is {s:e}, not zero as order {order} requires"
                )));
            }
        }
        let (s, scale) = moment(&coeffs, order);
        if s.abs() <= MOMENT_TOL * scale.max(1.0) {
            return Err(Error::Config(format!(
                "filter moment of degree {order} vanishes, so the order exceeds {order}"
            )));
        }
        Ok(Self { coeffs, order })
    }

    /// Parses comma-separated coefficients such as `1,-2,1`.
    pub fn parse(text: &str, order: usize) -> Result<Self> {
        let coeffs = text
            .split(',')
            .map(|s| {
                s.trim().parse::<f64>().map_err(|_| {
                    Error::Config(format!("`{}` is not a filter coefficient", s.trim()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(coeffs, order)
    }

    /// The default filter (1, −2, 1) of order 2.
    pub fn second_difference() -> Self {
        Self {
            coeffs: vec![1.0, -2.0, 1.0],
            order: 2,
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// L, where the filter has L + 1 coefficients.
    pub fn length(&self) -> usize {
        self.coeffs.len() - 1
    }
}

impl Default for Filter {
    fn default() -> Self {
        Self::second_difference()
    }
}

/// The filter with lag spacing doubled: a²_{2k} = a_k, zero at odd indices.
pub fn dilate(filter: &Filter) -> Filter {
    let mut coeffs = vec![0.0; 2 * filter.length() + 1];
    for (k, a) in filter.coeffs.iter().enumerate() {
        coeffs[2 * k] = *a;
    }
    Filter {
        coeffs,
        order: filter.order,
    }
}

/// ΣΣ a_i a_j |i − j|^r.
pub fn fractional_moment_form(coeffs: &[f64], r: f64) -> f64 {
    let mut s = 0.0;
    for (i, ai) in coeffs.iter().enumerate() {
        for (j, aj) in coeffs.iter().enumerate() {
            if i != j {
                s += ai * aj * (i.abs_diff(j) as f64).powf(r);
            }
        }
    }
    s
}

/// Sampled check of the non-vanishing condition on `r_grid`.
pub fn check_assumption_a(coeffs: &[f64], r_grid: &[f64]) -> bool {
    r_grid
        .iter()
        .all(|&r| fractional_moment_form(coeffs, r).abs() > MOMENT_TOL)
}

/// (1/T_N) Σ X_{t_k}² Δt_k with t₀ = 0.
pub fn quadratic_functional(path: &ObservedPath) -> Result<f64> {
    let horizon = path.horizon();
    if !(horizon > 0.0) {
        return Err(Error::Empty("path has no observation after time 0".into()));
    }
    let mut prev = 0.0;
    let mut sum = 0.0;
    for (t, x) in path.times().iter().zip(path.values()) {
        sum += x * x * (t - prev);
        prev = *t;
    }
    Ok(sum / horizon)
}

/// V_{N,a} = (1/N) Σ_i (Σ_j a_j X_{i+j})² over consecutive observations,
/// with N the number of observations.
pub fn generalized_quadratic_variation(path: &ObservedPath, filter: &Filter) -> Result<f64> {
    if !path.is_uniform() {
        return Err(Error::Domain(
            "generalized quadratic variation needs a uniform grid".into(),
        ));
    }
    let x = path.values();
    let len = filter.coeffs.len();
    if x.len() < len {
        return Err(Error::Size(format!(
            "path has {} observations, the filter needs at least {len}",
            x.len()
        )));
    }
    let sum: f64 = x
        .windows(len)
        .map(|w| {
            let d: f64 = w.iter().zip(&filter.coeffs).map(|(x, a)| x * a).sum();
            d * d
        })
        .sum();
    Ok(sum / x.len() as f64)
}

/// Raw Ĥ together with whether it fell in (1/2, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HurstEstimate {
    pub value: f64,
    pub in_range: bool,
}

impl HurstEstimate {
    /// The value clamped to [`HURST_CLAMP`] and whether clamping occurred.
    pub fn clamped(&self) -> (f64, bool) {
        let c = self.value.clamp(HURST_CLAMP.0, HURST_CLAMP.1);
        (c, c != self.value)
    }
}

/// ½ log₂(v_dilated / v).
pub fn hurst_from_variations(v: f64, v_dilated: f64) -> f64 {
    0.5 * (v_dilated / v).log2()
}

/// Ĥ = ½ log₂(V_{N,a²} / V_{N,a}).
pub fn estimate_hurst(path: &ObservedPath, filter: &Filter) -> Result<HurstEstimate> {
    if filter.order < 2 {
        return Err(Error::Parameter(format!(
            "the Hurst estimator needs a filter of order at least 2, got {}",
            filter.order
        )));
    }
    let v1 = generalized_quadratic_variation(path, filter)?;
    if !(v1 > 0.0) {
        return Err(Error::Degenerate(
            "generalized quadratic variation is zero".into(),
        ));
    }
    let v2 = generalized_quadratic_variation(path, &dilate(filter))?;
    let value = hurst_from_variations(v1, v2);
    if !value.is_finite() {
        return Err(Error::Degenerate(
            "dilated quadratic variation is zero".into(),
        ));
    }
    Ok(HurstEstimate {
        value,
        in_range: value > 0.5 && value < 1.0,
    })
}

/// Point estimates with asymptotic standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub mu_hat: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_hat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_hat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hurst_clamped: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_tilde: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr_theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci95: Option<[f64; 2]>,
    /// −ln Δ / ln N for uniform paths.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_exponent: Option<f64>,
    pub n_used: usize,
    pub horizon: f64,
}

fn nonzero_mu(path: &ObservedPath) -> Result<f64> {
    let mu = quadratic_functional(path)?;
    if mu == 0.0 {
        return Err(Error::Degenerate(
            "the quadratic functional is zero (all-zero path), θ would be infinite".into(),
        ));
    }
    Ok(mu)
}

/// θ̂ = Ψ⁻¹(μ̂) without the standard error.
pub fn theta_known_h(path: &ObservedPath, hurst: f64) -> Result<f64> {
    validate_hurst(hurst)?;
    psi_inverse(nonzero_mu(path)?, hurst)
}

/// θ̃ = Ψ⁻¹(μ̂; clamp(Ĥ)) without the standard error.
pub fn theta_unknown_h(path: &ObservedPath, filter: &Filter) -> Result<(f64, HurstEstimate)> {
    let mu = nonzero_mu(path)?;
    let h = estimate_hurst(path, filter)?;
    Ok((psi_inverse(mu, h.clamped().0)?, h))
}

/// √(σ_θ²/T), or `None` where σ² is outside its supported Hurst range.
fn standard_error(theta: f64, hurst: f64, horizon: f64) -> Result<Option<f64>> {
    let (lo, hi) = SIGMA2_HURST_RANGE;
    if !(lo..=hi).contains(&hurst) {
        return Ok(None);
    }
    let report = sigma_theta2(ModelParams::new(theta, hurst)?, &QuadratureSpec::default())?;
    Ok(Some((report.sigma_theta2 / horizon).sqrt()))
}

fn base_report(path: &ObservedPath, mu_hat: f64) -> EstimateReport {
    let mesh_exponent = match path.mesh() {
        Some(d) if path.len() >= 2 => Some(-d.ln() / (path.len() as f64).ln()),
        _ => None,
    };
    EstimateReport {
        mu_hat,
        theta_hat: None,
        h_hat: None,
        hurst_clamped: None,
        theta_tilde: None,
        stderr_theta: None,
        ci95: None,
        mesh_exponent,
        n_used: path.len(),
        horizon: path.horizon(),
    }
}

fn ci(theta: f64, se: f64) -> [f64; 2] {
    [theta - Z95 * se, theta + Z95 * se]
}

pub fn estimate_theta_known_h(path: &ObservedPath, hurst: f64) -> Result<EstimateReport> {
    let theta = theta_known_h(path, hurst)?;
    let se = standard_error(theta, hurst, path.horizon())?;
    Ok(EstimateReport {
        theta_hat: Some(theta),
        stderr_theta: se,
        ci95: se.map(|se| ci(theta, se)),
        ..base_report(path, quadratic_functional(path)?)
    })
}

/// θ̃ with Ĥ from `filter`; the standard error ignores the Ĥ noise.
pub fn estimate_theta_unknown_h(path: &ObservedPath, filter: &Filter) -> Result<EstimateReport> {
    let (theta, h) = theta_unknown_h(path, filter)?;
    let (hc, clamped) = h.clamped();
    let se = standard_error(theta, hc, path.horizon())?;
    Ok(EstimateReport {
        h_hat: Some(h.value),
        hurst_clamped: Some(clamped),
        theta_tilde: Some(theta),
        stderr_theta: se,
        ci95: se.map(|se| ci(theta, se)),
        ..base_report(path, quadratic_functional(path)?)
    })
}
